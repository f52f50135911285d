#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "rfon/engines.hpp"
#include "rfon/gauss_hermite.hpp"

using namespace rfon;

namespace {

ModelParams ising(double beta, double h) {
  ModelParams p;
  p.beta = beta;
  p.h = h;
  return p;
}

// Precision matrix read off the quadratic energy beta H(phi, 0) + mu |phi|^2 / 2 by polarization.
Eigen::MatrixXd precision_oracle(const Lattice& lat, const ModelParams& p, double mu) {
  const std::size_t v = lat.volume();
  const auto zero = zero_disorder(lat, 1);
  auto energy = [&](const std::vector<double>& phi) {
    double s = 0.0;
    for (double x : phi) s += x * x;
    return p.beta * hamiltonian({phi}, zero, p, lat) + 0.5 * mu * s;
  };
  Eigen::MatrixXd k(v, v);
  for (std::size_t x = 0; x < v; ++x)
    for (std::size_t y = 0; y < v; ++y) {
      std::vector<double> ex(v), ey(v), exy(v);
      ex[x] = 1.0;
      ey[y] = 1.0;
      exy[x] += 1.0;
      exy[y] += 1.0;
      k(x, y) = energy(exy) - energy(ex) - energy(ey);
      if (x == y) k(x, y) = 2.0 * energy(ex);
    }
  return k;
}

}  // namespace

TEST_CASE("exact enumeration matches a brute-force Gibbs sum") {
  const Lattice lat(2, 3);
  const auto p = ising(0.4, 0.8);
  const auto g = draw_disorder(lat, 1, 5, 0);
  const ExactEnumEngine engine(lat, p);
  const ExactState state(engine, g);

  const std::size_t v = lat.volume();
  std::vector<double> w;
  std::vector<std::vector<double>> configs;
  for (std::size_t c = 0; c < (std::size_t{1} << v); ++c) {
    SpinConfig s{std::vector<double>(v)};
    for (std::size_t x = 0; x < v; ++x) s.phi[x] = (c >> x) & 1u ? 1.0 : -1.0;
    w.push_back(-p.beta * hamiltonian(s, g, p, lat));
    configs.push_back(s.phi);
  }
  const double m = *std::max_element(w.begin(), w.end());
  double z = 0.0;
  for (double& e : w) z += (e = std::exp(e - m));
  CHECK(state.log_z() == doctest::Approx(m + std::log(z)).epsilon(1e-12));

  for (std::size_t q : {std::size_t{0}, std::size_t{1}, std::size_t{4}}) {
    cplx mean = 0.0, second = 0.0;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      cplx ft = 0.0;
      for (std::size_t x = 0; x < v; ++x) ft += lat.plane_wave(q, x) * configs[c][x];
      ft /= std::sqrt(static_cast<double>(v));
      mean += w[c] / z * ft;
      second += w[c] / z * std::norm(ft);
    }
    const std::vector<ObservableSpec> one{MomentumSpin{q, 0}};
    const std::vector<ObservableSpec> two{MomentumSpin{q, 0}, MomentumSpin{lat.negate(q), 0}};
    CHECK(std::abs(state.cumulant(one).value - mean) < 1e-12);
    CHECK(std::abs(state.cumulant(two).value - (second - std::norm(mean))) < 1e-12);
    CHECK(std::abs(state.expectation(two).value - second) < 1e-12);
  }
}

TEST_CASE("exact enumeration guards its domain") {
  CHECK_THROWS_AS(ExactEnumEngine(Lattice(1, 25), ising(0.1, 0.1)), std::invalid_argument);
  auto p = ising(0.1, 0.1);
  p.N = 2;
  CHECK_THROWS_AS(ExactEnumEngine(Lattice(1, 4), p), std::invalid_argument);
  p.N = 1;
  p.measure = Quartic{1.0};
  CHECK_THROWS_AS(ExactEnumEngine(Lattice(1, 4), p), std::invalid_argument);
}

TEST_CASE("Gaussian engine agrees with a direct matrix inverse") {
  const Lattice lat(2, 3);
  ModelParams p;
  p.beta = 0.3;
  p.h = 0.9;
  p.J = 0.7;
  p.measure = GaussianMass{4.0};
  const GaussianEngine engine(lat, p);
  const Eigen::MatrixXd k = precision_oracle(lat, p, 4.0);
  CHECK((engine.precision_matrix() - k).norm() < 1e-12);
  const Eigen::MatrixXd cov = k.fullPivLu().inverse();
  CHECK((engine.covariance_position() - cov).norm() < 1e-12);

  const auto g = draw_disorder(lat, 1, 8, 2);
  Eigen::VectorXd gv(lat.volume());
  for (std::size_t x = 0; x < lat.volume(); ++x) gv[x] = g.at(x, 0);
  const Eigen::VectorXd mean = p.beta * p.h * cov * gv;
  const auto m = engine.mean_position(g);
  for (std::size_t x = 0; x < lat.volume(); ++x) CHECK(m[x] == doctest::Approx(mean[x]).epsilon(1e-12));

  // the momentum covariance is the transform of K^{-1}
  for (std::size_t q = 0; q < lat.volume(); ++q) {
    cplx s = 0.0;
    for (std::size_t x = 0; x < lat.volume(); ++x)
      for (std::size_t y = 0; y < lat.volume(); ++y)
        s += lat.plane_wave(q, x) * std::conj(lat.plane_wave(q, y)) * cov(x, y);
    s /= static_cast<double>(lat.volume());
    CHECK(std::abs(engine.covariance_momentum(q, 0, lat.negate(q), 0) - s) < 1e-12);
    CHECK(engine.covariance_momentum(q, 0, q == 0 ? 1 : 0, 0) == 0.0);
  }
}

TEST_CASE("Gaussian cumulants above second order vanish") {
  const Lattice lat(1, 5);
  ModelParams p;
  p.beta = 0.2;
  p.N = 2;
  p.measure = GaussianMass{2.0};
  const GaussianEngine engine(lat, p);
  const GaussianState state(engine, draw_disorder(lat, 2, 3, 1));
  const std::vector<ObservableSpec> three{MomentumSpin{1, 0}, MomentumSpin{4, 0}, MomentumSpin{0, 1}};
  CHECK(std::abs(state.cumulant(three).value) == 0.0);
  const std::vector<ObservableSpec> two{MomentumSpin{1, 0}, MomentumSpin{4, 0}};
  CHECK(state.cumulant(two).value.real() == doctest::Approx(1.0 / engine.precision_symbol(1)));
  const std::vector<ObservableSpec> bad{UserFunction{"sq", [](std::span<const double> phi) {
                                          return cplx(phi[0] * phi[0]);
                                        }}};
  CHECK_THROWS_AS(engine.cumulant_form(bad), std::invalid_argument);
}

TEST_CASE("Gaussian engine enforces stability") {
  ModelParams p;
  p.beta = 0.5;
  p.J = -1.0;
  p.measure = GaussianMass{4.0};  // 4 beta |J| d = 4 at d = 2
  CHECK_THROWS_AS(GaussianEngine(Lattice(2, 3), p), std::invalid_argument);
  p.measure = GaussianMass{4.01};
  CHECK_NOTHROW(GaussianEngine(Lattice(2, 3), p));
  p.measure = Spherical{};
  CHECK_THROWS_AS(GaussianEngine(Lattice(2, 3), p), std::invalid_argument);
}

TEST_CASE("Gauss-Hermite rule integrates polynomials exactly") {
  for (int n : {1, 4, 9, 20}) {
    const auto rule = gauss_hermite(n);
    for (int deg = 0; deg < 2 * n; ++deg) {
      double s = 0.0, magnitude = 0.0;
      for (int i = 0; i < n; ++i) {
        s += rule.weights[i] * std::pow(rule.nodes[i], deg);
        magnitude += rule.weights[i] * std::pow(std::abs(rule.nodes[i]), deg);
      }
      double exact = deg % 2 ? 0.0 : 1.0;
      for (int k = deg - 1; k > 0 && deg % 2 == 0; k -= 2) exact *= k;
      // odd degrees cancel between symmetric nodes, so compare against the absolute moment
      CHECK(std::abs(s - exact) <= 1e-10 * std::max(1.0, magnitude));
    }
  }
  const auto rule = gauss_hermite(3);
  CHECK(tensor_size(3, 2) == 9);
  double pt[2];
  double total = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    const double w = tensor_point(rule, 2, i, pt);
    total += w;
    cross += w * pt[0] * pt[0] * pt[1] * pt[1];
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(cross == doctest::Approx(1.0));
}

TEST_CASE("Metropolis chain reproduces exact Ising moments") {
  const Lattice lat(1, 3);
  const auto p = ising(0.5, 0.7);
  const auto g = draw_disorder(lat, 1, 21, 0);
  const ExactState exact(ExactEnumEngine(lat, p), g);
  McmcSchedule s;
  s.thermalization = 500;
  s.measurements = 40000;
  const McmcEngine engine(lat, p, s);
  const std::vector<std::vector<ObservableSpec>> monomials{
      {PositionSpin{0, 0}}, {PositionSpin{0, 0}, PositionSpin{1, 0}}, {MomentumSpin{1, 0}, MomentumSpin{2, 0}}};
  const auto result = engine.run(g, 4, monomials);
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    const auto want = exact.expectation(monomials[i]).value;
    const auto got = result.estimates[i];
    CHECK(got.stderr > 0.0);
    CHECK(std::abs(got.value - want) < 4.0 * got.stderr);
  }
  const auto again = engine.run(g, 4, monomials);
  for (std::size_t i = 0; i < monomials.size(); ++i) CHECK(again.estimates[i].value == result.estimates[i].value);
}

TEST_CASE("spherical O(2) chain keeps unit spins") {
  const Lattice lat(2, 3);
  ModelParams p;
  p.beta = 0.4;
  p.h = 0.5;
  p.N = 2;
  McmcSchedule s;
  s.thermalization = 50;
  s.measurements = 200;
  const McmcEngine engine(lat, p, s);
  const auto r = engine.run(draw_disorder(lat, 2, 1, 0), 9);
  for (std::size_t x = 0; x < lat.volume(); ++x) {
    const std::vector<ObservableSpec> a{PositionSpin{x, 0}, PositionSpin{x, 0}};
    const std::vector<ObservableSpec> b{PositionSpin{x, 1}, PositionSpin{x, 1}};
    const double norm = (r.state->expectation(a).value + r.state->expectation(b).value).real();
    CHECK(std::abs(norm - 1.0) < 1e-12);
  }
}

TEST_CASE("Gaussian-mass chain matches the closed form") {
  const Lattice lat(1, 4);
  ModelParams p;
  p.beta = 0.25;
  p.h = 0.6;
  p.measure = GaussianMass{2.5};
  McmcSchedule s;
  s.thermalization = 1000;
  s.measurements = 60000;
  s.proposal_width = 1.2;
  const auto g = draw_disorder(lat, 1, 13, 0);
  const GaussianEngine closed(lat, p);
  const auto r = McmcEngine(lat, p, s).run(g, 2);
  const auto mean = closed.mean_momentum(g);
  for (std::size_t q = 0; q < lat.volume(); ++q) {
    const std::vector<ObservableSpec> one{MomentumSpin{q, 0}};
    const std::vector<ObservableSpec> two{MomentumSpin{q, 0}, MomentumSpin{lat.negate(q), 0}};
    const auto m = r.state->cumulant(one);
    const auto c = r.state->cumulant(two);
    CHECK(std::abs(m.value - mean.at(q, 0)) < 4.0 * m.stderr + 1e-12);
    CHECK(std::abs(c.value.real() - 1.0 / closed.precision_symbol(q)) < 4.0 * c.stderr);
  }
}

TEST_CASE("engine variant helpers") {
  const Lattice lat(1, 4);
  const Engine e = ExactEnumEngine(lat, ising(0.3, 0.5));
  CHECK(engine_name(e) == "exact_enum");
  CHECK(engine_lattice(e) == lat);
  const auto state = gibbs_state(e, draw_disorder(lat, 1, 1, 0), 0);
  const std::vector<ObservableSpec> one{PositionSpin{0, 0}};
  CHECK(std::abs(state->cumulant(one).value.real()) < 1.0);
}
