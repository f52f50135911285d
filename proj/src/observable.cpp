#include "rfon/observable.hpp"

#include <cmath>
#include <stdexcept>

namespace rfon {

std::string describe(const ObservableSpec& spec) {
  struct Visitor {
    std::string operator()(const MomentumSpin& s) const {
      return "phi~[k=" + std::to_string(s.k) + ",n=" + std::to_string(s.n) + "]";
    }
    std::string operator()(const PositionSpin& s) const {
      return "phi[x=" + std::to_string(s.x) + ",n=" + std::to_string(s.n) + "]";
    }
    std::string operator()(const UserFunction& s) const { return "f[" + s.name + "]"; }
  };
  return std::visit(Visitor{}, spec);
}

void validate(const ObservableSpec& spec, const Lattice& lattice, int components) {
  auto check_component = [&](int n) {
    if (n < 0 || n >= components)
      throw std::invalid_argument("observable component " + std::to_string(n) +
                                  " outside [0, N)");
  };
  if (const auto* m = std::get_if<MomentumSpin>(&spec)) {
    if (m->k >= lattice.volume())
      throw std::invalid_argument("momentum index " + std::to_string(m->k) + " is not on the grid");
    check_component(m->n);
  } else if (const auto* p = std::get_if<PositionSpin>(&spec)) {
    if (p->x >= lattice.volume())
      throw std::invalid_argument("site index " + std::to_string(p->x) + " outside the lattice");
    check_component(p->n);
  } else if (!std::get<UserFunction>(spec).fn) {
    throw std::invalid_argument("user observable has no function");
  }
}

cplx evaluate(const ObservableSpec& spec, std::span<const double> phi,
              std::span<const cplx> phi_tilde, int components) {
  if (const auto* m = std::get_if<MomentumSpin>(&spec))
    return phi_tilde[m->k * components + m->n];
  if (const auto* p = std::get_if<PositionSpin>(&spec)) return phi[p->x * components + p->n];
  return std::get<UserFunction>(spec).fn(phi);
}

ObservableSpec conjugate(const ObservableSpec& spec, const Lattice& lattice) {
  if (const auto* m = std::get_if<MomentumSpin>(&spec))
    return MomentumSpin{lattice.negate(m->k), m->n};
  if (std::holds_alternative<PositionSpin>(spec)) return spec;
  const auto& u = std::get<UserFunction>(spec);
  auto fn = u.fn;
  return UserFunction{"conj(" + u.name + ")",
                      [fn](std::span<const double> phi) { return std::conj(fn(phi)); }};
}

std::optional<LinearTerms> linear_terms(const ObservableSpec& spec, const Lattice& lattice,
                                        int components) {
  const auto n = static_cast<std::size_t>(components);
  if (const auto* m = std::get_if<MomentumSpin>(&spec))
    return LinearTerms{{m->k * n + static_cast<std::size_t>(m->n), cplx(1.0)}};
  if (const auto* p = std::get_if<PositionSpin>(&spec)) {
    // phi_x = V^{-1/2} sum_q e^{iq.x} phi~_q
    LinearTerms terms;
    terms.reserve(lattice.volume());
    const double c = 1.0 / std::sqrt(static_cast<double>(lattice.volume()));
    for (std::size_t k = 0; k < lattice.volume(); ++k)
      terms.emplace_back(k * n + static_cast<std::size_t>(p->n),
                         std::conj(lattice.plane_wave(k, p->x)) * c);
    return terms;
  }
  return std::nullopt;
}

}  // namespace rfon
