#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rfon/lattice.hpp"

namespace rfon {

/// phi~_q^n with q given by its flat momentum index.
struct MomentumSpin {
  std::size_t k = 0;
  int n = 0;
};

/// phi_x^n
struct PositionSpin {
  std::size_t x = 0;
  int n = 0;
};

/// Bounded complex-valued function of the whole configuration (layout x * N + n).
struct UserFunction {
  std::string name;
  std::function<cplx(std::span<const double> phi)> fn;
};

using ObservableSpec = std::variant<MomentumSpin, PositionSpin, UserFunction>;

std::string describe(const ObservableSpec& spec);

/// Throws std::invalid_argument when the observable references off-grid momenta, sites or components.
void validate(const ObservableSpec& spec, const Lattice& lattice, int components);

/// Value on one configuration; phi_tilde is the root-volume transform of phi.
cplx evaluate(const ObservableSpec& spec, std::span<const double> phi,
              std::span<const cplx> phi_tilde, int components);

/// The complex conjugate observable (momentum spins map to -q).
ObservableSpec conjugate(const ObservableSpec& spec, const Lattice& lattice);

/// Sparse expansion sum_i c_i phi~_i in the momentum basis (index k * N + n),
/// or nullopt for nonlinear observables.
using LinearTerms = std::vector<std::pair<std::size_t, cplx>>;
std::optional<LinearTerms> linear_terms(const ObservableSpec& spec, const Lattice& lattice,
                                        int components);

}  // namespace rfon
