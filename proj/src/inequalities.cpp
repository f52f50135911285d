#include "rfon/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rfon/correlators.hpp"
#include "rfon/cumulant.hpp"

namespace rfon {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::string join_specs(std::span<const ObservableSpec> f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + describe(f[i]);
  return s;
}

const GaussianEngine& analytic_engine(const Engine& engine) {
  const auto* g = std::get_if<GaussianEngine>(&engine);
  if (!g) throw std::invalid_argument("analytic averaging is only available for the Gaussian engine");
  return *g;
}

/// Var F from centered means of (F, |F|^2) and the reference value a = F_ref:
/// E|F - a|^2 - |E F - a|^2 with E|F - a|^2 = c1 - 2 Re(a* c0).
double centered_variance(cplx c0, cplx c1, cplx a) {
  return c1.real() - 2.0 * (std::conj(a) * c0).real() - std::norm(c0);
}

void finish(InequalityReport& report, const std::vector<double>& values,
            const std::vector<double>& errors, const std::vector<std::string>& labels,
            const std::vector<std::pair<std::size_t, std::size_t>>& links,
            const std::vector<double>& link_values, const std::vector<double>& link_errors) {
  report.labels = labels;
  report.values = values;
  report.errors = errors;
  report.verdict = Verdict::kHolds;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto [lo, hi] = links[i];
    const double scale = std::max(std::abs(values[lo]), std::abs(values[hi]));
    auto m = assess_margin(labels[hi] + " - " + labels[lo], link_values[i], link_errors[i], scale);
    report.verdict = worst(report.verdict, m.verdict);
    report.margins.push_back(std::move(m));
  }
}

void describe_run(InequalityReport& report, const Engine& engine, const DisorderAverager& averager) {
  report.metadata.emplace_back("engine", engine_name(engine));
  report.metadata.emplace_back("averaging", averaging_name(averager.mode));
  if (const auto* mc = std::get_if<MonteCarloAveraging>(&averager.mode))
    report.metadata.emplace_back("base_seed", std::to_string(mc->base_seed));
  if (const auto* gh = std::get_if<GaussHermiteAveraging>(&averager.mode))
    report.metadata.emplace_back("nodes", std::to_string(gh->nodes));
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kHolds: return "HOLDS";
    case Verdict::kInconclusive: return "INCONCLUSIVE";
    case Verdict::kViolated: return "VIOLATED";
  }
  return "INCONCLUSIVE";
}

Verdict worst(Verdict a, Verdict b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

MarginCheck assess_margin(std::string name, double difference, double stderr, double scale) {
  MarginCheck m;
  m.name = std::move(name);
  m.difference = difference;
  m.stderr = stderr;
  if (!(stderr > 0.0)) {
    m.verdict = difference >= -kExactTolerance * std::max(scale, 1e-300) ? Verdict::kHolds
                                                                        : Verdict::kViolated;
    return m;
  }
  m.sigma = difference / stderr;
  if (*m.sigma < -3.0)
    m.verdict = Verdict::kViolated;
  else if (*m.sigma < 0.0)
    m.verdict = Verdict::kInconclusive;
  else
    m.verdict = Verdict::kHolds;
  return m;
}

InequalityReport check_theorem_chain(const Engine& engine, const DisorderAverager& averager, int l,
                                     std::span<const ObservableSpec> f,
                                     std::uint64_t sampler_seed) {
  const int k = static_cast<int>(f.size());
  if (l == 0)
    throw std::invalid_argument(
        "l = 0 is rejected: the lower bound is unproven there (|E<f>|^2 <= Var<f> fails for "
        "deterministic statistics); use l >= 1");
  if (l < 0) throw std::invalid_argument("l must be a positive integer");
  if (k < 1) throw std::invalid_argument("need at least one observable f (k >= 1)");
  if (l + k > kMaxCumulantOrder || k + 1 > kMaxCumulantOrder)
    throw std::invalid_argument("cumulant order l + k must not exceed 6");

  const auto& lattice = engine_lattice(engine);
  const auto& params = engine_params(engine);
  const int n_comp = params.N;
  for (const auto& o : f) validate(o, lattice, n_comp);
  const double bh2 = params.beta * params.beta * params.h * params.h;
  const double lhs_prefactor = std::pow(bh2, l) / factorial(l);
  const std::size_t slots = lattice.volume() * static_cast<std::size_t>(n_comp);
  std::size_t grid = 1;
  for (int i = 0; i < l; ++i) grid *= slots;

  InequalityReport report;
  report.name = "theorem_chain";
  report.metadata.emplace_back("k", std::to_string(k));
  report.metadata.emplace_back("l", std::to_string(l));
  report.metadata.emplace_back("f", join_specs(f));
  describe_run(report, engine, averager);
  const std::vector<std::string> labels{"lhs", "mid", "rhs"};
  const std::vector<std::pair<std::size_t, std::size_t>> links{{0, 1}, {1, 2}};

  if (std::holds_alternative<AnalyticAveraging>(averager.mode)) {
    const auto& gauss = analytic_engine(engine);
    const double mid = gauss.cumulant_form(f).variance();
    std::vector<double> lhs_terms(grid), rhs_terms(slots);
    std::vector<std::size_t> momenta(l);
    std::vector<int> comps(l);
    for (std::size_t idx = 0; idx < grid; ++idx) {
      std::size_t rest = idx;
      for (int i = l - 1; i >= 0; --i) {
        const std::size_t slot = rest % slots;
        rest /= slots;
        momenta[i] = slot / n_comp;
        comps[i] = static_cast<int>(slot % n_comp);
      }
      lhs_terms[idx] = std::norm(gauss.cumulant_form(w_observables(momenta, comps, f)).mean());
    }
    for (std::size_t slot = 0; slot < slots; ++slot) {
      const std::size_t p[1] = {slot / n_comp};
      const int c[1] = {static_cast<int>(slot % n_comp)};
      rhs_terms[slot] = gauss.cumulant_form(w_observables(p, c, f)).second_moment();
    }
    const double lhs = lhs_prefactor * pairwise_sum(lhs_terms);
    const double rhs = bh2 * pairwise_sum(rhs_terms);
    finish(report, {lhs, mid, rhs}, {0.0, 0.0, 0.0}, labels, links, {mid - lhs, rhs - mid},
           {0.0, 0.0});
    return report;
  }

  const std::size_t w0 = 2, r_index = 2 + grid;
  auto statistic = [&](const DisorderSample& g, std::size_t) {
    auto state = gibbs_state(engine, g, sampler_seed);
    std::vector<cplx> row(3 + grid);
    const cplx F = state->cumulant(f).value;
    row[0] = F;
    row[1] = std::norm(F);
    const auto w = w_correlator_grid(*state, lattice, n_comp, l, f);
    for (std::size_t i = 0; i < grid; ++i) row[w0 + i] = w[i].value;
    std::vector<Estimate> w1;
    if (l == 1) {
      w1 = w;
    } else {
      w1 = w_correlator_grid(*state, lattice, n_comp, 1, f);
    }
    std::vector<double> sq(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i) sq[i] = std::norm(w1[i].value);
    row[r_index] = pairwise_sum(sq);
    return row;
  };
  const auto collected = collect_statistics(lattice, n_comp, averager, statistic);
  report.samples = collected.samples;

  auto estimator = [&](std::span<const cplx> c, std::span<const cplx> r) {
    const double mid = centered_variance(c[0], c[1], r[0]);
    std::vector<double> sq(grid);
    for (std::size_t i = 0; i < grid; ++i) sq[i] = std::norm(c[w0 + i] + r[w0 + i]);
    const double lhs = lhs_prefactor * pairwise_sum(sq);
    const double rhs = bh2 * (c[r_index] + r[r_index]).real();
    return std::vector<double>{lhs, mid, rhs, mid - lhs, rhs - mid};
  };
  const auto jk = collected.reduce_centered(estimator);
  finish(report, {jk.value[0], jk.value[1], jk.value[2]}, {jk.stderr[0], jk.stderr[1], jk.stderr[2]},
         labels, links, {jk.value[3], jk.value[4]}, {jk.stderr[3], jk.stderr[4]});
  return report;
}

InequalityReport check_schwartz_soffer(const Engine& engine, const DisorderAverager& averager,
                                       std::size_t q, int m, int n, std::uint64_t sampler_seed) {
  const auto& lattice = engine_lattice(engine);
  const auto& params = engine_params(engine);
  if (params.h == 0.0)
    throw std::invalid_argument(
        "h = 0 is rejected: the middle member carries the prefactor 1/(beta h)^2");
  if (params.beta == 0.0)
    throw std::invalid_argument("beta = 0 is rejected: the middle member carries 1/(beta h)^2");
  const int n_comp = params.N;
  validate(MomentumSpin{q, m}, lattice, n_comp);
  validate(MomentumSpin{q, n}, lattice, n_comp);
  const double bh2 = params.beta * params.beta * params.h * params.h;
  const std::size_t slots = lattice.volume() * static_cast<std::size_t>(n_comp);
  const std::size_t mq = lattice.negate(q);

  InequalityReport report;
  report.name = "schwartz_soffer";
  report.metadata.emplace_back("q", std::to_string(q));
  report.metadata.emplace_back("m", std::to_string(m));
  report.metadata.emplace_back("n", std::to_string(n));
  describe_run(report, engine, averager);
  const std::vector<std::string> labels{"lhs", "mid", "rhs"};
  const std::vector<std::pair<std::size_t, std::size_t>> links{{0, 1}, {1, 2}};

  auto pair_obs = [](std::size_t k1, int c1, std::size_t k2, int c2) {
    return std::vector<ObservableSpec>{MomentumSpin{k1, c1}, MomentumSpin{k2, c2}};
  };

  if (std::holds_alternative<AnalyticAveraging>(averager.mode)) {
    const auto& gauss = analytic_engine(engine);
    const double lhs = std::norm(gauss.cumulant_form(pair_obs(q, m, mq, n)).mean());
    const ObservableSpec single[1] = {MomentumSpin{q, m}};
    const double mid = gauss.cumulant_form(single).second_moment() / bh2;
    std::vector<double> rhs_terms(slots), note_terms(slots);
    for (std::size_t slot = 0; slot < slots; ++slot) {
      const std::size_t p = slot / n_comp;
      const int c = static_cast<int>(slot % n_comp);
      rhs_terms[slot] = gauss.cumulant_form(pair_obs(q, c, p, m)).second_moment();
      note_terms[slot] = std::norm(gauss.cumulant_form(pair_obs(q, m, p, c)).mean());
    }
    const double rhs = pairwise_sum(rhs_terms);
    const double note = pairwise_sum(note_terms);
    finish(report, {lhs, mid, rhs}, {0.0, 0.0, 0.0}, labels, links, {mid - lhs, rhs - mid},
           {0.0, 0.0});
    report.extra.push_back(assess_margin("note_bound - lhs", note - lhs, 0.0, std::max(note, lhs)));
    report.labels.push_back("note_bound");
    report.values.push_back(note);
    report.errors.push_back(0.0);
    return report;
  }

  const std::size_t c0 = 3;
  auto statistic = [&](const DisorderSample& g, std::size_t) {
    auto state = gibbs_state(engine, g, sampler_seed);
    std::vector<cplx> row(3 + slots);
    row[0] = state->cumulant(pair_obs(q, m, mq, n)).value;
    const ObservableSpec single[1] = {MomentumSpin{q, m}};
    row[1] = std::norm(state->cumulant(single).value);
    std::vector<double> sq(slots);
    for (std::size_t slot = 0; slot < slots; ++slot) {
      const std::size_t p = slot / n_comp;
      const int c = static_cast<int>(slot % n_comp);
      sq[slot] = std::norm(state->cumulant(pair_obs(q, c, p, m)).value);
      row[c0 + slot] = (c == n && p == mq) ? row[0] : state->cumulant(pair_obs(q, m, p, c)).value;
    }
    row[2] = pairwise_sum(sq);
    return row;
  };
  const auto collected = collect_statistics(lattice, n_comp, averager, statistic);
  report.samples = collected.samples;

  auto estimator = [&](std::span<const cplx> means) {
    const double lhs = std::norm(means[0]);
    const double mid = means[1].real() / bh2;
    const double rhs = means[2].real();
    std::vector<double> sq(slots);
    for (std::size_t s = 0; s < slots; ++s) sq[s] = std::norm(means[c0 + s]);
    const double note = pairwise_sum(sq);
    return std::vector<double>{lhs, mid, rhs, mid - lhs, rhs - mid, note, note - lhs};
  };
  const auto jk = collected.reduce(estimator);
  finish(report, {jk.value[0], jk.value[1], jk.value[2]}, {jk.stderr[0], jk.stderr[1], jk.stderr[2]},
         labels, links, {jk.value[3], jk.value[4]}, {jk.stderr[3], jk.stderr[4]});
  report.extra.push_back(assess_margin("note_bound - lhs", jk.value[6], jk.stderr[6],
                                       std::max(std::abs(jk.value[5]), std::abs(jk.value[0]))));
  report.labels.push_back("note_bound");
  report.values.push_back(jk.value[5]);
  report.errors.push_back(jk.stderr[5]);
  return report;
}

VarianceResult variance_of_correlator(const Engine& engine, const DisorderAverager& averager,
                                      std::span<const ObservableSpec> f,
                                      std::uint64_t sampler_seed) {
  if (f.empty()) throw std::invalid_argument("need at least one observable");
  const auto& lattice = engine_lattice(engine);
  const int n_comp = engine_params(engine).N;
  for (const auto& o : f) validate(o, lattice, n_comp);

  VarianceResult out;
  if (std::holds_alternative<AnalyticAveraging>(averager.mode)) {
    out.value = analytic_engine(engine).cumulant_form(f).variance();
    return out;
  }
  auto statistic = [&](const DisorderSample& g, std::size_t) {
    auto state = gibbs_state(engine, g, sampler_seed);
    const cplx F = state->cumulant(f).value;
    return std::vector<cplx>{F, std::norm(F)};
  };
  const auto collected = collect_statistics(lattice, n_comp, averager, statistic);
  const auto jk = collected.reduce_centered([](std::span<const cplx> c, std::span<const cplx> r) {
    return std::vector<double>{centered_variance(c[0], c[1], r[0])};
  });
  out.value = jk.value[0];
  out.samples = collected.samples;
  if (collected.blocks.resampled) out.stderr = jk.stderr[0];
  return out;
}

}  // namespace rfon
