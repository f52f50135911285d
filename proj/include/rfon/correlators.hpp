#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rfon/engines.hpp"

namespace rfon {

/// <phi~_{p_1}^{n_1}; ...; phi~_{p_l}^{n_l}; f_1; ...; f_k>_g
struct WCorrelator {
  std::vector<std::size_t> momenta;
  std::vector<int> components;
  std::vector<ObservableSpec> tail;
  cplx value = 0.0;
  double stderr = 0.0;
};

/// The observable list (momentum spins first, then the tail) whose cumulant is W.
std::vector<ObservableSpec> w_observables(std::span<const std::size_t> momenta,
                                          std::span<const int> components,
                                          std::span<const ObservableSpec> tail);

WCorrelator w_correlator(const GibbsState& state, std::span<const std::size_t> momenta,
                         std::span<const int> components, std::span<const ObservableSpec> tail);

WCorrelator w_correlator(const Engine& engine, const DisorderSample& disorder,
                         std::span<const std::size_t> momenta, std::span<const int> components,
                         std::span<const ObservableSpec> tail, std::uint64_t sampler_seed = 0);

/// W for every (p_1..p_l, n_1..n_l) on the grid; entry order has p_1, n_1 slowest.
/// Index of a slot list = sum_i (p_i * N + n_i) * (V N)^(l - 1 - i).
std::vector<Estimate> w_correlator_grid(const GibbsState& state, const Lattice& lattice,
                                        int components, int l,
                                        std::span<const ObservableSpec> tail);

/// chi~^{m,n}(q, g) = <phi~_q^m; phi~_{-q}^n>_g
Estimate susceptibility(const GibbsState& state, const Lattice& lattice, std::size_t q, int m,
                        int n);
Estimate susceptibility(const Engine& engine, const DisorderSample& disorder, std::size_t q, int m,
                        int n, std::uint64_t sampler_seed = 0);

/// Columns: l, k, momenta, components, re, im, stderr (lists joined with ';').
void write_correlator_csv(const std::filesystem::path& path, std::span<const WCorrelator> rows);

}  // namespace rfon
