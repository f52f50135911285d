// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 runs every criterion
//   acceptance --criterion N   runs criterion N only (exit status 1 on FAIL)

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rfon/experiment.hpp"
#include "rfon/largen.hpp"

using namespace rfon;

namespace {

// Pinned tolerances and budgets.
constexpr double kSaturationRelTol = 1e-10;     // 1
constexpr double kSaturationBudget = 1.0;       // seconds
constexpr double kSigmaFloor = -3.0;            // 2, 3, 7
constexpr std::size_t kChainSamples = 10000;    // 2
constexpr double kChainBudget = 600.0;
constexpr std::size_t kGammaOuterSamples = 1000;  // 3
constexpr int kGammaInnerNodes = 6;
constexpr double kGammaFdStep = 0.005;
constexpr double kGammaAnalyticTol = 1e-10;
constexpr double kCumulantRelTol = 1e-6;        // 4
constexpr int kCumulantInstances = 50;
constexpr double kGammaOracleTol = 1e-12;       // 5
constexpr double kSaddleTol = 1e-8;
constexpr double kLargeNBudget = 5.0;
constexpr double kAsymptoticBudget = 1.0;       // 6
constexpr int kMcmcInstances = 20;              // 7
constexpr double kMcmcBudget = 120.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

ModelParams ising(double beta, double h) {
  ModelParams p;
  p.beta = beta;
  p.h = h;
  return p;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool statistically_ok(const MarginCheck& m) {
  if (m.sigma) return *m.sigma >= kSigmaFloor;
  return m.verdict != Verdict::kViolated;
}

// 1 -------------------------------------------------------------------------

Outcome gaussian_saturation() {
  Outcome out;
  const auto start = Clock::now();
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d)
    for (int L : {3, 8}) {
      const Lattice lat(d, L);
      ModelParams p;
      p.beta = 0.35;
      p.h = 0.9;
      p.N = 2;
      p.measure = GaussianMass{4.0 * p.beta * d + 0.75};
      const Engine engine = GaussianEngine(lat, p);
      const DisorderAverager avg{AnalyticAveraging{}};
      for (std::size_t q = 0; q < lat.volume(); ++q) {
        const auto r = check_schwartz_soffer(engine, avg, q, 1, 1);
        const double scale = std::max({std::abs(r.values[0]), std::abs(r.values[1]), std::abs(r.values[2])});
        const double dev = std::max(std::abs(r.values[1] - r.values[0]), std::abs(r.values[2] - r.values[1])) / scale;
        worst = std::max(worst, dev);
        if (!(dev < kSaturationRelTol))
          out.fail(fmt("d=%g q=%g relative deviation %.3e", d, static_cast<double>(q), dev));
      }
    }
  const double t = seconds_since(start);
  if (!(t < kSaturationBudget)) out.fail(fmt("runtime %.3f s", t));
  if (out.pass) out.detail = fmt("max relative deviation %.2e, %.3f s", worst, t);
  return out;
}

// 2 -------------------------------------------------------------------------

Outcome theorem_chain() {
  Outcome out;
  const auto start = Clock::now();
  const Lattice lat(1, 4);
  const std::vector<ObservableSpec> one{MomentumSpin{1, 0}};
  const std::vector<ObservableSpec> two{MomentumSpin{1, 0}, MomentumSpin{3, 0}};
  double min_sigma = INFINITY;
  for (double beta : {0.3, 0.7})
    for (double h : {0.5, 1.0})
      for (auto [k, l] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}}) {
        const Engine engine = ExactEnumEngine(lat, ising(beta, h));
        const DisorderAverager avg{MonteCarloAveraging{kChainSamples, 101}, workers()};
        const auto r = check_theorem_chain(engine, avg, l, k == 1 ? one : two);
        for (const auto& m : r.margins) {
          if (m.sigma) min_sigma = std::min(min_sigma, *m.sigma);
          if (!statistically_ok(m))
            out.fail(fmt("beta=%g h=%g: ", beta, h) + m.name + fmt(" at %.2f sigma", m.sigma.value_or(-INFINITY)));
        }
      }
  const double t = seconds_since(start);
  if (!(t < kChainBudget)) out.fail(fmt("runtime %.1f s", t));
  if (out.pass) out.detail = fmt("smallest margin %.2f sigma, %.1f s", min_sigma, t);
  return out;
}

// 3 -------------------------------------------------------------------------

Outcome gamma_suite() {
  Outcome out;
  const auto start = Clock::now();
  const Lattice lat(1, 4);
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  const std::vector<ObservableSpec> f{MomentumSpin{1, 0}};
  double min_sigma = INFINITY;
  {
    const Engine engine = ExactEnumEngine(lat, ising(0.7, 1.0));
    GammaConfig config;
    config.outer = DisorderAverager{MonteCarloAveraging{kGammaOuterSamples, 31}, workers()};
    config.inner = GaussHermiteAveraging{kGammaInnerNodes};
    const auto path = gamma_path(engine, grid, f, config, kGammaFdStep);
    for (const auto* list : {&path.monotone, &path.convex}) {
      for (const auto& m : *list) {
        if (m.sigma) min_sigma = std::min(min_sigma, *m.sigma);
        if (!statistically_ok(m)) out.fail(m.name + fmt(" at %.2f sigma", m.sigma.value_or(-INFINITY)));
      }
    }
    for (const auto& m : path.lemma1)
      if (m.verdict == Verdict::kViolated) out.fail(m.name + fmt(" at %.2f sigma", m.sigma.value_or(NAN)));
  }
  const double mc_time = seconds_since(start);

  ModelParams p;
  p.beta = 0.45;
  p.h = 0.8;
  p.measure = GaussianMass{3.0};
  const GaussianEngine ge(lat, p);
  const Engine gauss = ge;
  GammaConfig exact;
  exact.outer = DisorderAverager{AnalyticAveraging{}};
  exact.inner = AnalyticAveraging{};
  const double bh2 = p.beta * p.beta * p.h * p.h;
  for (std::size_t q = 0; q < lat.volume(); ++q) {
    const std::vector<ObservableSpec> fq{MomentumSpin{q, 0}};
    const double slope = bh2 / std::pow(ge.precision_symbol(q), 2);
    for (double t : grid) {
      const double g = gamma_value(gauss, t, fq, exact).value;
      if (!(std::abs(g - t * slope) <= kGammaAnalyticTol * slope))
        out.fail(fmt("Gaussian gamma(%g) at q=%g off by %.3e", t, static_cast<double>(q), g - t * slope));
    }
    for (auto [j, l] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 1}})
      for (auto [t1, t2] : {std::pair{0.0, 1.0}, std::pair{0.2, 0.6}, std::pair{0.5, 0.9}}) {
        const auto r = check_lemma2(gauss, t1, t2, j, l, fq, exact);
        if (r.verdict != Verdict::kHolds) out.fail(fmt("Lemma 2 (j=%g, l=%g) at t1=%g", j, l, t1));
      }
  }
  if (out.pass) out.detail = fmt("smallest margin %.2f sigma, quadrature path %.1f s", min_sigma, mc_time);
  return out;
}

// 4 -------------------------------------------------------------------------

using Big = boost::multiprecision::cpp_bin_float_50;

// Mixed central difference of log Z(b) with sources b_i coupled to phi_{x_i}, brute force in
// 50-digit arithmetic.
double log_z_derivative(const Lattice& lat, const ModelParams& p, const DisorderSample& g,
                        const std::vector<std::size_t>& sites) {
  const std::size_t v = lat.volume();
  const int j = static_cast<int>(sites.size());
  std::vector<double> weight;
  std::vector<std::vector<double>> spins;
  for (std::size_t c = 0; c < (std::size_t{1} << v); ++c) {
    SpinConfig s{std::vector<double>(v)};
    for (std::size_t x = 0; x < v; ++x) s.phi[x] = (c >> x) & 1u ? 1.0 : -1.0;
    weight.push_back(-p.beta * hamiltonian(s, g, p, lat));
    spins.push_back(s.phi);
  }
  const Big step("1e-8");
  Big total = 0;
  for (unsigned mask = 0; mask < (1u << j); ++mask) {
    int sign = 1;
    std::vector<Big> b(j);
    for (int i = 0; i < j; ++i) {
      const bool up = mask >> i & 1u;
      b[i] = up ? step : Big(-step);
      if (!up) sign = -sign;
    }
    Big z = 0;
    for (std::size_t c = 0; c < weight.size(); ++c) {
      Big e = weight[c];
      for (int i = 0; i < j; ++i) e += b[i] * spins[c][sites[i]];
      z += exp(e);
    }
    total += sign * log(z);
  }
  return static_cast<double>(total / pow(2 * step, j));
}

Outcome cumulant_oracle() {
  Outcome out;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> beta(0.05, 0.9), h(0.1, 1.5);
  std::uniform_int_distribution<int> dim(1, 2);
  double worst = 0.0;
  for (int trial = 0; trial < kCumulantInstances; ++trial) {
    const int d = dim(rng);
    const Lattice lat(d, d == 1 ? 4 : 3);
    std::uniform_int_distribution<std::size_t> site(0, lat.volume() - 1);
    const auto p = ising(beta(rng), h(rng));
    const auto g = draw_disorder(lat, 1, 404, static_cast<std::uint64_t>(trial));
    const ExactState state(ExactEnumEngine(lat, p), g);
    for (int j = 1; j <= 4; ++j) {
      std::vector<std::size_t> sites(j);
      std::vector<ObservableSpec> obs;
      for (auto& s : sites) {
        s = site(rng);
        obs.push_back(PositionSpin{s, 0});
      }
      const double fd = log_z_derivative(lat, p, g, sites);
      const double k = state.cumulant(obs).value.real();
      const double rel = std::abs(k - fd) / std::abs(fd);
      worst = std::max(worst, rel);
      if (!(rel < kCumulantRelTol)) out.fail(fmt("instance %g order %g relative error %.3e", trial, j, rel));
    }
  }
  if (out.pass) out.detail = fmt("max relative error %.2e over %g instances", worst, kCumulantInstances);
  return out;
}

// 5 -------------------------------------------------------------------------

Outcome large_n_values() {
  Outcome out;
  const auto start = Clock::now();
  for (double d : {4.1, 4.5, 5.0, 5.5, 5.9})
    for (int n : {1, 2, 3, 4, 10, 100}) {
      const auto e = large_n_exponents(d, n);
      const double want = (d - 4.0) / n;
      if (!(e.eta == want && e.eta_bar == want && e.eta_prime == want))
        out.fail(fmt("exponents at d=%g N=%g", d, n));
      if (!(2 * e.eta >= e.eta_bar)) out.fail(fmt("2 eta < eta_bar at d=%g N=%g", d, n));
    }

  const Big pi = boost::math::constants::pi<Big>();
  const Big five = 5;
  const Big pre = pow(4 * pi, -five / 2);
  const double c3_oracle = static_cast<double>(pre * tgamma(Big(3) / 2) * pow(tgamma(Big(1) / 2), 2) / tgamma(Big(1)));
  const double c2_oracle = static_cast<double>(2 * pre * tgamma(Big(1) / 2) * tgamma(Big(3) / 2) * tgamma(Big(1) / 2) / tgamma(Big(2)));
  const auto c = continuum_coefficients(5.0, 1.0);
  const double c3_err = std::abs(c.c3 - c3_oracle) / c3_oracle;
  const double c2_err = std::abs(c.c2 - c2_oracle) / c2_oracle;
  if (!(c3_err < kGammaOracleTol)) out.fail(fmt("c3 relative error %.3e", c3_err));
  if (!(c2_err < kGammaOracleTol)) out.fail(fmt("c2 relative error %.3e", c2_err));
  if (!(std::abs(c3_oracle - 1.0 / (64 * std::numbers::pi)) < 1e-15)) out.fail("c3 oracle is not 1/(64 pi)");
  if (!(std::abs(c2_oracle - 1.0 / (32 * std::numbers::pi)) < 1e-15)) out.fail("c2 oracle is not 1/(32 pi)");

  const Lattice lat(3, 8);
  double worst = 0.0;
  for (double bdg : {0.0, 0.5, 2.0})
    for (double planted : {0.01, 0.5, 3.0}) {
      const auto s = solve_saddle(saddle_rhs(lat, planted, bdg), bdg, lat);
      worst = std::max(worst, std::abs(s.m2 - planted));
      if (!(std::abs(s.m2 - planted) < kSaddleTol)) out.fail(fmt("saddle roundtrip m2=%g misses by %.3e", planted, s.m2 - planted));
    }
  const double t = seconds_since(start);
  if (!(t < kLargeNBudget)) out.fail(fmt("runtime %.2f s", t));
  if (out.pass) out.detail = fmt("c2/c3 errors %.1e/%.1e, saddle %.1e", c2_err, c3_err, worst);
  return out;
}

// 6 -------------------------------------------------------------------------

Outcome four_point_asymptotics() {
  Outcome out;
  const auto start = Clock::now();
  const auto grid = log_grid(1e-3, 1e-1, 20);
  std::string summary;
  for (int n : {2, 4, 10}) {
    int bad = 0;
    double worst = 0.0;
    const auto report = exponents_and_checks(5.0, n, 1.0, grid);
    for (const auto& c : report.checks) {
      if (c.name != "four_point_bound") continue;
      const double ratio = c.lhs / c.rhs;
      if (c.breakdown || !(ratio < 1.0)) {
        ++bad;
        worst = std::max(worst, std::abs(ratio));
      }
    }
    if (bad > 0) out.fail("N=" + std::to_string(n) + fmt(": %g of 20 grid points fail, worst |LHS/RHS| %.3g", bad, worst));
    summary += "N=" + std::to_string(n) + (bad ? " fails " : " ok ");
  }
  const double t = seconds_since(start);
  if (!(t < kAsymptoticBudget)) out.fail(fmt("runtime %.3f s", t));
  if (!out.pass) out.detail += " (" + summary + ")";
  else out.detail = summary;
  return out;
}

// 7 -------------------------------------------------------------------------

Outcome engine_cross_validation() {
  Outcome out;
  const auto start = Clock::now();
  const Lattice lat(1, 3);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> beta(0.05, 0.6), h(0.2, 1.5);
  std::vector<std::vector<ObservableSpec>> monomials;
  for (std::size_t x = 0; x < 3; ++x) monomials.push_back({PositionSpin{x, 0}});
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = x + 1; y < 3; ++y) monomials.push_back({PositionSpin{x, 0}, PositionSpin{y, 0}});
  McmcSchedule schedule;
  schedule.thermalization = 1000;
  schedule.measurements = 40000;
  double min_sigma = INFINITY;
  for (int trial = 0; trial < kMcmcInstances; ++trial) {
    const auto p = ising(beta(rng), h(rng));
    const auto g = draw_disorder(lat, 1, 707, static_cast<std::uint64_t>(trial));
    const ExactState exact(ExactEnumEngine(lat, p), g);
    const auto run = McmcEngine(lat, p, schedule).run(g, 1000 + trial, monomials);
    for (std::size_t i = 0; i < monomials.size(); ++i) {
      const double want = exact.expectation(monomials[i]).value.real();
      const auto& got = run.estimates[i];
      const double z = got.stderr > 0.0 ? (got.value.real() - want) / got.stderr : (got.value.real() == want ? 0.0 : INFINITY);
      min_sigma = std::min(min_sigma, -std::abs(z));
      if (!(std::abs(z) <= -kSigmaFloor))
        out.fail(fmt("instance %g moment %g off by %.2f sigma", trial, static_cast<double>(i), z));
    }
  }
  const double t = seconds_since(start);
  if (!(t < kMcmcBudget)) out.fail(fmt("runtime %.1f s", t));
  if (out.pass) out.detail = fmt("largest deviation %.2f sigma, %.1f s", -min_sigma, t);
  return out;
}

// 8 -------------------------------------------------------------------------

Outcome determinism() {
  Outcome out;
  std::vector<ExperimentConfig> configs;
  {
    ExperimentConfig c;
    c.model.beta = 0.7;
    c.model.h = 1.0;
    c.disorder.n_samples = 2000;
    c.disorder.base_seed = 12;
    c.task = CheckTheoremTask{1, 1, {ObservableEntry{"momentum", 1, 0}}};
    configs.push_back(c);
    c.task = CheckSsTask{};
    configs.push_back(c);
    GammaPathTask g;
    g.t_grid = {0.0, 0.5, 1.0};
    g.inner.n_samples = 16;
    c.disorder.n_samples = 100;
    c.task = g;
    configs.push_back(c);
    c.engine.variant = "mcmc";
    c.engine.schedule.thermalization = 100;
    c.engine.schedule.measurements = 1000;
    c.disorder.n_samples = 40;
    c.task = SimulateTask{};
    configs.push_back(c);
  }
  for (const auto& c : configs) {
    const auto a = run_experiment(c, 1).document.dump(2);
    const auto b = run_experiment(c, 8).document.dump(2);
    if (a != b) out.fail(task_name(c.task) + " differs between 1 and 8 workers");
  }
  if (out.pass) out.detail = std::to_string(configs.size()) + " reports byte-identical";
  return out;
}

const std::function<Outcome()> kCriteria[] = {gaussian_saturation, theorem_chain, gamma_suite,
                                              cumulant_oracle,     large_n_values, four_point_asymptotics,
                                              engine_cross_validation, determinism};

const char* kNames[] = {"Gaussian saturation", "theorem chain",       "gamma path",
                        "cumulant oracle",     "large-N values",      "four-point asymptotics",
                        "engine cross-validation", "determinism"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "run one criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (int c = 1; c <= 8; ++c) {
    if (only && c != only) continue;
    Outcome o;
    try {
      o = kCriteria[c - 1]();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("criterion %d (%s): %s  %s\n", c, kNames[c - 1], o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
