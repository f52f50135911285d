#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rfon/cumulant.hpp"
#include "rfon/engines.hpp"

namespace rfon {

cplx LinearForm::evaluate(const MomentumField& g_tilde) const {
  cplx out = constant;
  for (const auto& [i, b] : coefficients) out += b * g_tilde.values[i];
  return out;
}

double LinearForm::coefficient_norm2() const {
  std::vector<double> sq(coefficients.size());
  for (std::size_t i = 0; i < coefficients.size(); ++i) sq[i] = std::norm(coefficients[i].second);
  return pairwise_sum(sq);
}

GaussianEngine::GaussianEngine(const Lattice& lattice, const ModelParams& params)
    : lattice_(lattice), params_(params) {
  params.validate();
  const auto* g = std::get_if<GaussianMass>(&params.measure);
  if (!g) throw std::invalid_argument("the Gaussian engine needs the gaussian_mass measure");
  mu_ = g->mu;
  const double bound = 4.0 * params.beta * std::abs(params.J) * lattice.dim();
  if (!(mu_ > bound))
    throw std::invalid_argument("precision operator is not positive definite: need mu > " +
                                std::to_string(bound) + " (4 beta |J| d), got mu = " +
                                std::to_string(mu_));
  symbol_.resize(lattice.volume());
  const double hop = lattice.coordination() > 0 ? 4.0 * params.beta * params.J : 0.0;
  for (std::size_t k = 0; k < symbol_.size(); ++k) symbol_[k] = mu_ - hop * lattice.cos_sum(k);
}

double GaussianEngine::precision_symbol(std::size_t k) const { return symbol_.at(k); }

Eigen::MatrixXd GaussianEngine::precision_matrix() const {
  const std::size_t v = lattice_.volume();
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(v, v) * mu_;
  for (std::size_t x = 0; x < v; ++x)
    for (std::size_t y : lattice_.neighbors(x)) k(x, y) -= 2.0 * params_.beta * params_.J;
  return k;
}

std::vector<double> GaussianEngine::mean_position(const DisorderSample& disorder) const {
  const std::size_t v = lattice_.volume();
  const auto n = static_cast<std::size_t>(params_.N);
  if (disorder.volume() != v || disorder.components() != params_.N)
    throw std::invalid_argument("disorder sample does not match the Gaussian engine");
  Eigen::LLT<Eigen::MatrixXd> llt(precision_matrix());
  if (llt.info() != Eigen::Success) throw std::runtime_error("precision matrix is not positive definite");
  Eigen::MatrixXd rhs(v, n);
  for (std::size_t x = 0; x < v; ++x)
    for (std::size_t c = 0; c < n; ++c) rhs(x, c) = params_.beta * params_.h * disorder.at(x, c);
  Eigen::MatrixXd sol = llt.solve(rhs);
  std::vector<double> out(v * n);
  for (std::size_t x = 0; x < v; ++x)
    for (std::size_t c = 0; c < n; ++c) out[x * n + c] = sol(x, c);
  return out;
}

MomentumField GaussianEngine::mean_momentum(const DisorderSample& disorder) const {
  if (disorder.volume() != lattice_.volume() || disorder.components() != params_.N)
    throw std::invalid_argument("disorder sample does not match the Gaussian engine");
  MomentumField out = disorder.fourier();
  const auto n = static_cast<std::size_t>(params_.N);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] *= params_.beta * params_.h / symbol_[i / n];
  return out;
}

Eigen::MatrixXd GaussianEngine::covariance_position() const {
  Eigen::LLT<Eigen::MatrixXd> llt(precision_matrix());
  if (llt.info() != Eigen::Success) throw std::runtime_error("precision matrix is not positive definite");
  const auto v = static_cast<Eigen::Index>(lattice_.volume());
  return llt.solve(Eigen::MatrixXd::Identity(v, v));
}

cplx GaussianEngine::covariance_momentum(std::size_t k, int n, std::size_t p, int m) const {
  if (n != m || p != lattice_.negate(k)) return 0.0;
  return 1.0 / symbol_.at(k);
}

LinearForm GaussianEngine::cumulant_form(std::span<const ObservableSpec> observables) const {
  const int j = static_cast<int>(observables.size());
  if (j < 1 || j > kMaxCumulantOrder) throw std::invalid_argument("cumulant order must be in [1, 6]");
  std::vector<LinearTerms> terms;
  terms.reserve(observables.size());
  for (const auto& o : observables) {
    validate(o, lattice_, params_.N);
    auto t = linear_terms(o, lattice_, params_.N);
    if (!t)
      throw std::invalid_argument("the Gaussian engine only handles observables linear in phi, not " +
                                  describe(o));
    terms.push_back(std::move(*t));
  }

  const auto n = static_cast<std::size_t>(params_.N);
  LinearForm form;
  if (j == 1) {
    const double bh = params_.beta * params_.h;
    for (const auto& [i, c] : terms[0]) form.coefficients.emplace_back(i, c * bh / symbol_[i / n]);
  } else if (j == 2) {
    // <phi~_q^n; phi~_p^m> = delta_nm delta_{p,-q} / K^(q)
    std::vector<cplx> parts;
    parts.reserve(terms[0].size());
    if (terms[1].size() <= 8) {
      for (const auto& [i, c] : terms[0]) {
        const std::size_t k = i / n, partner = lattice_.negate(k) * n + i % n;
        for (const auto& [i2, c2] : terms[1])
          if (i2 == partner) parts.push_back(c * c2 / symbol_[k]);
      }
    } else {
      std::vector<cplx> dense(lattice_.volume() * n);
      for (const auto& [i, c] : terms[1]) dense[i] += c;
      for (const auto& [i, c] : terms[0]) {
        const std::size_t k = i / n;
        parts.push_back(c * dense[lattice_.negate(k) * n + i % n] / symbol_[k]);
      }
    }
    form.constant = pairwise_sum(parts);
  }
  return form;
}

GaussianState::GaussianState(GaussianEngine engine, const DisorderSample& disorder)
    : engine_(std::move(engine)), g_tilde_(disorder.fourier()) {
  if (disorder.volume() != engine_.lattice().volume() || disorder.components() != engine_.params().N)
    throw std::invalid_argument("disorder sample does not match the Gaussian engine");
}

Estimate GaussianState::cumulant(std::span<const ObservableSpec> observables) const {
  return {engine_.cumulant_form(observables).evaluate(g_tilde_), 0.0, 0.5};
}

Estimate GaussianState::expectation(std::span<const ObservableSpec> monomial) const {
  // Moments from cumulants; only orders one and two survive.
  const int j = static_cast<int>(monomial.size());
  if (j == 0) return {1.0, 0.0, 0.5};
  if (j > kMaxCumulantOrder) throw std::invalid_argument("moment order must be <= 6");
  std::vector<cplx> kappa(std::size_t{1} << j);
  for (std::size_t m = 1; m < kappa.size(); ++m) {
    const int size = std::popcount(m);
    if (size > 2) continue;
    std::vector<ObservableSpec> sub;
    for (int i = 0; i < j; ++i)
      if (m >> i & 1u) sub.push_back(monomial[i]);
    kappa[m] = engine_.cumulant_form(sub).evaluate(g_tilde_);
  }
  cplx total = 0.0;
  for (const auto& p : set_partitions(j)) {
    cplx term = 1.0;
    for (unsigned b : p.blocks) term *= kappa[b];
    total += term;
  }
  return {total, 0.0, 0.5};
}

}  // namespace rfon
