#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfon/interpolation.hpp"

using namespace rfon;

namespace {

ModelParams gaussian(double beta, double h, double mu, int n = 1) {
  ModelParams p;
  p.beta = beta;
  p.h = h;
  p.N = n;
  p.measure = GaussianMass{mu};
  return p;
}

GammaConfig analytic() {
  GammaConfig c;
  c.outer = DisorderAverager{AnalyticAveraging{}};
  c.inner = AnalyticAveraging{};
  return c;
}

}  // namespace

TEST_CASE("interpolated disorder hits both endpoints") {
  const Lattice lat(2, 3);
  const auto g = draw_disorder(lat, 2, 10, 0);
  const auto gp = draw_disorder(lat, 2, 10, 1);
  const auto at1 = interpolated_disorder(g, gp, 1.0);
  const auto at0 = interpolated_disorder(g, gp, 0.0);
  const auto mid = interpolated_disorder(g, gp, 0.25);
  for (std::size_t i = 0; i < g.values().size(); ++i) {
    CHECK(at1.values()[i] == g.values()[i]);
    CHECK(at0.values()[i] == gp.values()[i]);
    CHECK(mid.values()[i] == doctest::Approx(0.5 * g.values()[i] + std::sqrt(0.75) * gp.values()[i]));
  }
  CHECK_THROWS_AS(interpolated_disorder(g, gp, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(interpolated_disorder(g, gp, -0.1), std::invalid_argument);
  const auto other = draw_disorder(lat, 1, 10, 0);
  CHECK_THROWS_AS(interpolated_disorder(g, other, 0.5), std::invalid_argument);
}

TEST_CASE("Gaussian gamma path is linear in t") {
  const Lattice lat(1, 6);
  const auto p = gaussian(0.4, 0.9, 3.0, 2);
  const GaussianEngine ge(lat, p);
  const Engine engine = ge;
  for (std::size_t q = 0; q < lat.volume(); ++q) {
    const std::vector<ObservableSpec> f{MomentumSpin{q, 1}};
    const double slope = p.beta * p.beta * p.h * p.h / std::pow(ge.precision_symbol(q), 2);
    for (double t : {0.0, 0.3, 1.0}) {
      CHECK(std::abs(gamma_value(engine, t, f, analytic()).value - t * slope) < 1e-12 * slope);
      CHECK(std::abs(gamma_derivative(engine, t, 1, f, analytic()).value - slope) < 1e-12 * slope);
      CHECK(gamma_derivative(engine, t, 2, f, analytic()).value == 0.0);
    }
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto path = gamma_path(engine, grid, f, analytic());
    CHECK(path.verdict == Verdict::kHolds);
    CHECK(path.lemma1.size() == 3);
    CHECK(std::isnan(path.finite_difference.front()));
  }
}

TEST_CASE("Lemma 2 on the Gaussian model") {
  const Lattice lat(2, 3);
  const auto p = gaussian(0.5, 1.1, 6.0);
  const GaussianEngine ge(lat, p);
  const Engine engine = ge;
  const std::vector<ObservableSpec> f{MomentumSpin{1, 0}};
  const double slope = p.beta * p.beta * p.h * p.h / std::pow(ge.precision_symbol(1), 2);
  const auto r = check_lemma2(engine, 0.25, 0.75, 0, 1, f, analytic());
  CHECK(r.values[0] == doctest::Approx(0.5 * slope).epsilon(1e-12));
  CHECK(r.values[1] == doctest::Approx(0.75 * slope).epsilon(1e-12));
  CHECK(r.verdict == Verdict::kHolds);
  CHECK(check_lemma2(engine, 0.0, 1.0, 0, 2, f, analytic()).verdict == Verdict::kHolds);
  CHECK(check_lemma2(engine, 0.0, 1.0, 1, 1, f, analytic()).verdict == Verdict::kHolds);
  CHECK_THROWS_AS(check_lemma2(engine, 0.75, 0.25, 0, 1, f, analytic()), std::invalid_argument);
  const std::vector<ObservableSpec> none;
  CHECK_THROWS_AS(check_lemma2(engine, 0.0, 1.0, 0, 1, none, analytic()), std::invalid_argument);
}

TEST_CASE("argument checks") {
  const Lattice lat(1, 3);
  const Engine gauss = GaussianEngine(lat, gaussian(0.3, 1.0, 3.0));
  ModelParams ising;
  ising.beta = 0.3;
  ising.h = 1.0;
  const Engine exact = ExactEnumEngine(lat, ising);
  const std::vector<ObservableSpec> f{MomentumSpin{1, 0}};
  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(gamma_path(gauss, one, f, analytic()), std::invalid_argument);
  const std::vector<double> unsorted{0.5, 0.2};
  CHECK_THROWS_AS(gamma_path(gauss, unsorted, f, analytic()), std::invalid_argument);
  CHECK_THROWS_AS(gamma_value(exact, 0.5, f, analytic()), std::invalid_argument);
  GammaConfig odd;
  odd.inner = MonteCarloAveraging{3, 1};
  CHECK_THROWS_AS(gamma_value(exact, 0.5, f, odd), std::invalid_argument);
  GammaConfig mixed;
  mixed.outer = DisorderAverager{AnalyticAveraging{}};
  CHECK_THROWS_AS(gamma_value(gauss, 0.5, f, mixed), std::invalid_argument);
  const std::vector<ObservableSpec> six(6, MomentumSpin{0, 0});
  CHECK_THROWS_AS(gamma_derivative(exact, 0.5, 1, six, odd), std::invalid_argument);
}

TEST_CASE("Ising gamma path with quadrature inner expectation") {
  const Lattice lat(1, 3);
  ModelParams p;
  p.beta = 0.5;
  p.h = 0.8;
  const Engine engine = ExactEnumEngine(lat, p);
  const std::vector<ObservableSpec> f{MomentumSpin{1, 0}};
  GammaConfig config;
  config.outer = DisorderAverager{MonteCarloAveraging{400, 5}};
  config.inner = GaussHermiteAveraging{6};
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto path = gamma_path(engine, grid, f, config, 0.01);
  CHECK(path.verdict != Verdict::kViolated);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(path.gamma[i].inner_bias == 0.0);
    if (grid[i] > 0.0) CHECK(path.gamma[i].stderr > 0.0);
  }
  CHECK(path.gamma.back().value > path.gamma.front().value);
  const auto csv = gamma_csv(path);
  CHECK(csv.rfind("t,gamma,stderr,dgamma_lemma1,stderr\n", 0) == 0);

  // the same path on Monte Carlo inner draws agrees within errors
  GammaConfig mc = config;
  mc.inner = MonteCarloAveraging{64, 9};
  const auto v = gamma_value(engine, 0.5, f, mc);
  CHECK(std::abs(v.value - path.gamma[2].value) < 4.0 * std::hypot(v.stderr, path.gamma[2].stderr));
}
