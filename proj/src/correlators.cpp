#include "rfon/correlators.hpp"

#include <fstream>
#include <stdexcept>

#include "rfon/cumulant.hpp"

namespace rfon {

std::vector<ObservableSpec> w_observables(std::span<const std::size_t> momenta,
                                          std::span<const int> components,
                                          std::span<const ObservableSpec> tail) {
  if (momenta.size() != components.size())
    throw std::invalid_argument("need one component per momentum slot");
  if (momenta.size() + tail.size() > static_cast<std::size_t>(kMaxCumulantOrder))
    throw std::invalid_argument("l + k must not exceed 6");
  std::vector<ObservableSpec> obs;
  obs.reserve(momenta.size() + tail.size());
  for (std::size_t i = 0; i < momenta.size(); ++i) obs.emplace_back(MomentumSpin{momenta[i], components[i]});
  obs.insert(obs.end(), tail.begin(), tail.end());
  return obs;
}

WCorrelator w_correlator(const GibbsState& state, std::span<const std::size_t> momenta,
                         std::span<const int> components, std::span<const ObservableSpec> tail) {
  WCorrelator w;
  w.momenta.assign(momenta.begin(), momenta.end());
  w.components.assign(components.begin(), components.end());
  w.tail.assign(tail.begin(), tail.end());
  const auto obs = w_observables(momenta, components, tail);
  const auto e = state.cumulant(obs);
  w.value = e.value;
  w.stderr = e.stderr;
  return w;
}

WCorrelator w_correlator(const Engine& engine, const DisorderSample& disorder,
                         std::span<const std::size_t> momenta, std::span<const int> components,
                         std::span<const ObservableSpec> tail, std::uint64_t sampler_seed) {
  auto state = gibbs_state(engine, disorder, sampler_seed);
  return w_correlator(*state, momenta, components, tail);
}

std::vector<Estimate> w_correlator_grid(const GibbsState& state, const Lattice& lattice,
                                        int components, int l,
                                        std::span<const ObservableSpec> tail) {
  if (l < 0) throw std::invalid_argument("l must be >= 0");
  const std::size_t slots = lattice.volume() * static_cast<std::size_t>(components);
  std::size_t total = 1;
  for (int i = 0; i < l; ++i) total *= slots;
  std::vector<Estimate> out(total);
  std::vector<std::size_t> momenta(l);
  std::vector<int> comps(l);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int i = l - 1; i >= 0; --i) {
      const std::size_t slot = rest % slots;
      rest /= slots;
      momenta[i] = slot / components;
      comps[i] = static_cast<int>(slot % components);
    }
    out[idx] = state.cumulant(w_observables(momenta, comps, tail));
  }
  return out;
}

Estimate susceptibility(const GibbsState& state, const Lattice& lattice, std::size_t q, int m,
                        int n) {
  if (q >= lattice.volume()) throw std::invalid_argument("momentum index is not on the grid");
  const ObservableSpec obs[2] = {MomentumSpin{q, m}, MomentumSpin{lattice.negate(q), n}};
  return state.cumulant(obs);
}

Estimate susceptibility(const Engine& engine, const DisorderSample& disorder, std::size_t q, int m,
                        int n, std::uint64_t sampler_seed) {
  auto state = gibbs_state(engine, disorder, sampler_seed);
  return susceptibility(*state, engine_lattice(engine), q, m, n);
}

void write_correlator_csv(const std::filesystem::path& path, std::span<const WCorrelator> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "l,k,momenta,components,re,im,stderr\n";
  for (const auto& w : rows) {
    out << w.momenta.size() << ',' << w.tail.size() << ',';
    for (std::size_t i = 0; i < w.momenta.size(); ++i) out << (i ? ";" : "") << w.momenta[i];
    out << ',';
    for (std::size_t i = 0; i < w.components.size(); ++i) out << (i ? ";" : "") << w.components[i];
    out << ',' << w.value.real() << ',' << w.value.imag() << ',' << w.stderr << '\n';
  }
}

}  // namespace rfon
