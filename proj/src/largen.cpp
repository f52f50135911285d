#include "rfon/largen.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "rfon/stats.hpp"

namespace rfon {
namespace {

constexpr double kPi = std::numbers::pi;

void require_m2(double m2) {
  if (!(m2 >= 0.0) || !std::isfinite(m2)) throw std::invalid_argument("m^2 must be finite and >= 0");
}

void require_dimension(double d) {
  if (!(d > 4.0 && d < 6.0)) throw std::invalid_argument("continuum formulas need 4 < d < 6");
  if (std::abs(d - 4.0) < 1e-9 || std::abs(d - 6.0) < 1e-9)
    throw std::invalid_argument("d within 1e-9 of 4 or 6 hits a Gamma-function pole");
}

void require_disorder(double beta_delta_g) {
  if (!(beta_delta_g > 0.0) || !std::isfinite(beta_delta_g))
    throw std::invalid_argument("betaDeltaG must be > 0");
}

bool skip_zero_mode(const Lattice& lattice, std::size_t k, double m2, ZeroMode zero_mode) {
  if (lattice.laplacian(k) != 0.0 || m2 > 0.0) return false;
  if (zero_mode == ZeroMode::kExclude) return true;
  throw std::invalid_argument("massless zero mode: m^2 = 0 at q = 0 (exclude the zero mode)");
}

// Gc and Gd tables with the zero mode set to 0 when excluded.
void propagator_tables(const Lattice& lattice, double m2, ZeroMode zero_mode, std::vector<double>& gc,
                       std::vector<double>& gd) {
  const std::size_t v = lattice.volume();
  gc.assign(v, 0.0);
  gd.assign(v, 0.0);
  for (std::size_t k = 0; k < v; ++k) {
    if (skip_zero_mode(lattice, k, m2, zero_mode)) continue;
    const auto p = bare_propagator_from_symbol(lattice.laplacian(k), m2);
    gc[k] = p.gc;
    gd[k] = p.gd;
  }
}

// Gauss-Legendre nodes and weights on [-1, 1].
template <int Order>
void legendre_rule(std::vector<double>& x, std::vector<double>& w) {
  using Rule = boost::math::quadrature::gauss<double, Order>;
  const auto& a = Rule::abscissa();
  const auto& b = Rule::weights();
  x.clear();
  w.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      x.push_back(0.0);
      w.push_back(b[i]);
      continue;
    }
    x.push_back(a[i]);
    w.push_back(b[i]);
    x.push_back(-a[i]);
    w.push_back(b[i]);
  }
}

// int over [-1, 1]^dims of (1 + |u|^2)^-2 by a tensor rule.
double pyramid_face_integral(int dims, const std::vector<double>& x, const std::vector<double>& w) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(dims), 0);
  std::vector<double> terms;
  for (;;) {
    double r2 = 1.0, weight = 1.0;
    for (int i = 0; i < dims; ++i) {
      r2 += x[idx[i]] * x[idx[i]];
      weight *= w[idx[i]];
    }
    terms.push_back(weight / (r2 * r2));
    int i = 0;
    while (i < dims && ++idx[i] == n) idx[i++] = 0;
    if (i == dims) break;
  }
  return pairwise_sum(terms);
}

}  // namespace

BarePropagator bare_propagator_from_symbol(double laplacian, double m2) {
  require_m2(m2);
  const double denom = -laplacian + m2;
  if (denom == 0.0) throw std::invalid_argument("massless zero mode: -Lap + m^2 = 0");
  return {1.0 / denom, 1.0 / (denom * denom)};
}

BarePropagator bare_propagator_continuum(double q, double m2) {
  return bare_propagator_from_symbol(-q * q, m2);
}

BarePropagator bare_propagator_lattice(const Lattice& lattice, std::size_t k, double m2) {
  return bare_propagator_from_symbol(lattice.laplacian(k), m2);
}

double saddle_rhs(const Lattice& lattice, double m2, double beta_delta_g, ZeroMode zero_mode) {
  require_m2(m2);
  const std::size_t v = lattice.volume();
  std::vector<double> terms;
  terms.reserve(v);
  for (std::size_t k = 0; k < v; ++k) {
    if (skip_zero_mode(lattice, k, m2, zero_mode)) continue;
    const auto p = bare_propagator_lattice(lattice, k, m2);
    terms.push_back(p.gc + beta_delta_g * p.gd);
  }
  return pairwise_sum(terms) / static_cast<double>(v);
}

SaddleSolution solve_saddle(double beta, double beta_delta_g, const Lattice& lattice,
                            ZeroMode zero_mode) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
  if (!(beta_delta_g >= 0.0)) throw std::invalid_argument("betaDeltaG must be >= 0");
  auto f = [&](double m2) { return saddle_rhs(lattice, m2, beta_delta_g, zero_mode) - beta; };

  double hi = 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  double lo = 0.0;
  if (zero_mode == ZeroMode::kExclude) {
    const double limit = saddle_rhs(lattice, 0.0, beta_delta_g, zero_mode);
    if (beta >= limit)
      throw NoSaddleSolution("no saddle point: beta = " + std::to_string(beta) +
                                 " is at or above the massless limit " + std::to_string(limit),
                             limit);
  } else {
    lo = hi;
    while (f(lo) < 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw NoSaddleSolution("no saddle point above m^2 = 1e-300", beta);
    }
  }

  SaddleSolution out;
  while (out.iterations < 2000) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
    ++out.iterations;
  }
  const double flo = lo > 0.0 || zero_mode == ZeroMode::kExclude ? std::abs(f(lo)) : INFINITY;
  const double fhi = std::abs(f(hi));
  out.m2 = flo < fhi ? lo : hi;
  out.residual = std::min(flo, fhi);
  if (!(out.residual < 1e-10 * std::max(1.0, beta)))
    throw std::runtime_error("saddle bisection did not reach residual 1e-10 (got " +
                             std::to_string(out.residual) + ")");
  return out;
}

PolarizationPieces polarization_at(const Lattice& lattice, std::size_t k, double m2,
                                   double beta_delta_g, ZeroMode zero_mode) {
  std::vector<double> gc, gd;
  propagator_tables(lattice, m2, zero_mode, gc, gd);
  const std::size_t v = lattice.volume();
  std::vector<double> aa(v), ab(v), ba(v), bb(v);
  for (std::size_t q = 0; q < v; ++q) {
    const std::size_t kq = lattice.subtract(k, q);
    aa[q] = gc[kq] * gc[q];
    ab[q] = gc[kq] * gd[q];
    ba[q] = gd[kq] * gc[q];
    bb[q] = gd[kq] * gd[q];
  }
  const double inv = 1.0 / static_cast<double>(v);
  return {pairwise_sum(aa) * inv, beta_delta_g * pairwise_sum(ab) * inv,
          beta_delta_g * pairwise_sum(ba) * inv, beta_delta_g * beta_delta_g * pairwise_sum(bb) * inv};
}

std::vector<PolarizationPieces> polarization(const Lattice& lattice, double m2, double beta_delta_g,
                                             ZeroMode zero_mode, PolarizationMethod method) {
  require_m2(m2);
  const std::size_t v = lattice.volume();
  if (method == PolarizationMethod::kAuto)
    method = v <= kPolarizationDirectLimit ? PolarizationMethod::kDirect : PolarizationMethod::kFft;
  std::vector<PolarizationPieces> out(v);
  if (method == PolarizationMethod::kDirect) {
    for (std::size_t k = 0; k < v; ++k) out[k] = polarization_at(lattice, k, m2, beta_delta_g, zero_mode);
    return out;
  }

  // (1/V) sum_q X(k - q) Y(q) is the forward transform of the product of the inverse transforms
  // when the inverse carries the 1/V.
  std::vector<double> gc, gd;
  propagator_tables(lattice, m2, zero_mode, gc, gd);
  std::vector<cplx> in(2 * v), pos(2 * v);
  for (std::size_t k = 0; k < v; ++k) {
    in[2 * k] = gc[k];
    in[2 * k + 1] = gd[k];
  }
  detail::dft(lattice, 2, +1, in.data(), pos.data());
  const double inv = 1.0 / static_cast<double>(v);
  std::vector<cplx> prod(3 * v), mom(3 * v);
  for (std::size_t x = 0; x < v; ++x) {
    const cplx a = pos[2 * x] * inv, b = pos[2 * x + 1] * inv;
    prod[3 * x] = a * a;
    prod[3 * x + 1] = a * b;
    prod[3 * x + 2] = b * b;
  }
  detail::dft(lattice, 3, -1, prod.data(), mom.data());
  for (std::size_t k = 0; k < v; ++k) {
    const double cross = beta_delta_g * mom[3 * k + 1].real();
    out[k] = {mom[3 * k].real(), cross, cross, beta_delta_g * beta_delta_g * mom[3 * k + 2].real()};
  }
  return out;
}

CubatureResult brillouin_inverse_q4(int d) {
  if (d <= 4) throw std::invalid_argument("int_q 1/q^4 diverges for d <= 4");
  // Split the cube into 2d pyramids with apex at the origin; the radial integral is
  // pi^{d-4}/(d-4) and the face integral is smooth.
  std::vector<double> x, w;
  const double prefactor = 2.0 * d * std::pow(kPi, d - 4) / (d - 4) / std::pow(2.0 * kPi, d);
  legendre_rule<30>(x, w);
  const double fine = prefactor * pyramid_face_integral(d - 1, x, w);
  legendre_rule<20>(x, w);
  const double coarse = prefactor * pyramid_face_integral(d - 1, x, w);
  return {fine, std::abs(fine - coarse)};
}

AsymptoticCoefficients continuum_coefficients(double d, double beta_delta_g) {
  require_dimension(d);
  require_disorder(beta_delta_g);
  // All Gamma arguments are positive on 4 < d < 6.
  const double log_pref = -0.5 * d * std::log(4.0 * kPi);
  const double lg_d2 = std::lgamma((d - 2.0) / 2.0);
  const double lg_d4 = std::lgamma((d - 4.0) / 2.0);
  const double lg_6d = std::lgamma((6.0 - d) / 2.0);
  const double lg_8d = std::lgamma((8.0 - d) / 2.0);
  const double lg_dm4 = std::lgamma(d - 4.0);
  const double lg_dm3 = std::lgamma(d - 3.0);

  AsymptoticCoefficients c;
  const double bracket = 2.0 * std::exp(2.0 * lg_d2) - 0.5 * std::exp(2.0 * lg_d4);
  c.c1 = std::exp(log_pref + lg_6d - lg_dm4) * bracket;
  c.c2 = 2.0 * beta_delta_g * std::exp(log_pref + lg_6d + lg_d2 + lg_d4 - lg_dm3);
  c.c3 = beta_delta_g * beta_delta_g * std::exp(log_pref + lg_8d + 2.0 * lg_d4 - lg_dm4);
  if (d == std::round(d)) c.c0 = brillouin_inverse_q4(static_cast<int>(d)).value;
  return c;
}

EpsilonPropagator epsilon_propagator(double k, double d, int N, double beta_delta_g) {
  if (!(k > 0.0)) throw std::invalid_argument("epsilon propagator needs k > 0");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  const auto c = continuum_coefficients(d, beta_delta_g);
  const double pref = 2.0 / (N * c.c2);
  return {pref * std::pow(k, 6.0 - d), -pref * beta_delta_g * (6.0 - d) / 2.0 * std::pow(k, 4.0 - d)};
}

ExponentSet large_n_exponents(double d, int N) {
  if (!(d > 4.0 && d < 6.0)) throw std::invalid_argument("exponents need 4 < d < 6");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  const double e = (d - 4.0) / N;
  return {e, e, e};
}

AsymptoticCorrelators asymptotic_correlators(double q, double d, int N, double beta_delta_g) {
  if (!(q > 0.0)) throw std::invalid_argument("q must be > 0");
  if (q >= 1.0) throw std::invalid_argument("asymptotic forms need q < 1 (log q changes sign)");
  require_dimension(d);
  require_disorder(beta_delta_g);
  const auto ex = large_n_exponents(d, N);
  const double lq = std::log(q), q2 = q * q, q4 = q2 * q2;
  AsymptoticCorrelators a;
  a.q = q;
  a.log_factor = 1.0 + ex.eta * lq;
  a.connected_2pt = a.log_factor / q2;
  a.disconnected_2pt = beta_delta_g * a.log_factor / q4;
  a.disconnected_4pt = a.log_factor / q4;
  a.connected_4pt = (4.0 - d) / (4.0 * beta_delta_g * beta_delta_g * N * N) * lq / q4;
  a.susceptibility_variance = (ex.eta_prime - 2.0 * ex.eta) * lq / q4;
  a.susceptibility_lower = (4.0 - d) / (8.0 * N) * lq / q4;
  return a;
}

bool LargeNReport::all_pass() const {
  if (!schwartz_soffer) return false;
  for (const auto& c : checks)
    if (c.gating && !c.pass) return false;
  return true;
}

LargeNReport exponents_and_checks(double d, int N, double beta_delta_g,
                                  std::span<const double> q_grid) {
  LargeNReport r;
  r.d = d;
  r.N = N;
  r.beta_delta_g = beta_delta_g;
  r.exponents = large_n_exponents(d, N);
  r.coefficients = continuum_coefficients(d, beta_delta_g);
  r.schwartz_soffer = 2.0 * r.exponents.eta >= r.exponents.eta_bar;
  for (double q : q_grid) {
    const auto a = asymptotic_correlators(q, d, N, beta_delta_g);
    r.correlators.push_back(a);
    const bool breakdown = !(a.log_factor > 0.0);
    auto add = [&](std::string name, double lhs, double rhs, bool gating) {
      r.checks.push_back({std::move(name), q, lhs, rhs, breakdown, !breakdown && lhs <= rhs, gating});
    };
    // Connected four-point sum over (p, n) for k = 1, l = 3 against 3! (beta h)^-6 E|<phi_q>|^2,
    // with (beta h)^2 = betaDeltaG.
    const double bd2 = beta_delta_g * beta_delta_g;
    add("four_point_bound", N * a.connected_4pt, 6.0 / bd2 * a.log_factor / (q * q * q * q), true);
    add("variance_lower", a.susceptibility_lower, a.susceptibility_variance, false);
    add("variance_upper", a.susceptibility_variance, a.disconnected_2pt, false);
  }
  return r;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw std::invalid_argument("log grid needs 0 < lo < hi, n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace rfon
