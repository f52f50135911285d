#include "rfon/interpolation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "rfon/correlators.hpp"
#include "rfon/cumulant.hpp"
#include "rfon/gauss_hermite.hpp"
#include "rfon/rng.hpp"

namespace rfon {

DisorderSample interpolated_disorder(const DisorderSample& g, const DisorderSample& gprime, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolation parameter t must lie in [0, 1]");
  if (g.values().size() != gprime.values().size() || g.components() != gprime.components())
    throw std::invalid_argument("interpolated disorder needs samples of equal shape");
  if (t == 1.0) return g;
  if (t == 0.0) return gprime;
  return DisorderSample::combine(std::sqrt(t), g, std::sqrt(1.0 - t), gprime, g.seed(), g.stream());
}

MarginCheck assess_equality(std::string name, double difference, double stderr, double scale,
                            double rel_tol) {
  MarginCheck m;
  m.name = std::move(name);
  m.difference = difference;
  m.stderr = stderr;
  if (!(stderr > 0.0)) {
    m.verdict = std::abs(difference) <= rel_tol * std::max(scale, 1e-300) ? Verdict::kHolds
                                                                         : Verdict::kViolated;
    return m;
  }
  m.sigma = difference / stderr;
  m.verdict = std::abs(*m.sigma) <= 3.0 ? Verdict::kHolds : Verdict::kViolated;
  return m;
}

namespace {

/// One nested-expectation quantity: gamma^{(order)}(t), order 0 being gamma itself.
struct Query {
  double t;
  int order;
};

std::size_t grid_size(std::size_t slots, int order) {
  std::size_t g = 1;
  for (int i = 0; i < order; ++i) g *= slots;
  return g;
}

void decode_slots(std::size_t idx, std::size_t slots, int components, int order,
                  std::vector<std::size_t>& momenta, std::vector<int>& comps) {
  momenta.resize(order);
  comps.resize(order);
  for (int i = order - 1; i >= 0; --i) {
    const std::size_t slot = idx % slots;
    idx /= slots;
    momenta[i] = slot / components;
    comps[i] = static_cast<int>(slot % components);
  }
}

/// <f> (order 0) or the W grid (order l) at one disorder field.
class InnerEvaluator {
 public:
  virtual ~InnerEvaluator() = default;
  virtual void evaluate(const DisorderSample& field, std::span<const int> orders,
                        std::vector<std::vector<cplx>>& out) = 0;
};

/// Exact enumeration with one precomputed table of f and every phi~_p.
class ExactEvaluator final : public InnerEvaluator {
 public:
  ExactEvaluator(const ExactEnumEngine& engine, std::span<const ObservableSpec> f)
      : engine_(engine), k_(f.size()), prob_(engine.configurations()) {
    std::vector<ObservableSpec> columns(f.begin(), f.end());
    for (std::size_t p = 0; p < engine.lattice().volume(); ++p) columns.emplace_back(MomentumSpin{p, 0});
    table_ = engine.tabulate(columns);
  }

  void evaluate(const DisorderSample& field, std::span<const int> orders,
                std::vector<std::vector<cplx>>& out) override {
    engine_.gibbs_probabilities(field.values(), prob_);
    const std::size_t slots = engine_.lattice().volume();
    out.resize(orders.size());
    for (std::size_t o = 0; o < orders.size(); ++o) {
      const int l = orders[o];
      const std::size_t grid = grid_size(slots, l);
      out[o].resize(grid);
      for (std::size_t idx = 0; idx < grid; ++idx) {
        cols_.clear();
        std::size_t rest = idx;
        std::vector<std::size_t> slot_cols(l);
        for (int i = l - 1; i >= 0; --i) {
          slot_cols[i] = k_ + rest % slots;
          rest /= slots;
        }
        cols_.insert(cols_.end(), slot_cols.begin(), slot_cols.end());
        for (std::size_t i = 0; i < k_; ++i) cols_.push_back(i);
        moments_.resize(std::size_t{1} << cols_.size());
        subset_moments(table_, prob_, cols_, moments_);
        out[o][idx] = connected_from_moments(moments_, static_cast<int>(cols_.size()));
      }
    }
  }

 private:
  ExactEnumEngine engine_;
  std::size_t k_;
  ObservableTable table_;
  std::vector<double> prob_;
  std::vector<std::size_t> cols_;
  std::vector<cplx> moments_;
};

class GenericEvaluator final : public InnerEvaluator {
 public:
  GenericEvaluator(const Engine& engine, std::span<const ObservableSpec> f, std::uint64_t seed)
      : engine_(engine), f_(f.begin(), f.end()), seed_(seed) {}

  void evaluate(const DisorderSample& field, std::span<const int> orders,
                std::vector<std::vector<cplx>>& out) override {
    auto state = gibbs_state(engine_, field, seed_);
    const auto& lattice = engine_lattice(engine_);
    const int n = engine_params(engine_).N;
    out.resize(orders.size());
    for (std::size_t o = 0; o < orders.size(); ++o) {
      if (orders[o] == 0) {
        out[o] = {state->cumulant(f_).value};
        continue;
      }
      const auto w = w_correlator_grid(*state, lattice, n, orders[o], f_);
      out[o].resize(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) out[o][i] = w[i].value;
    }
  }

 private:
  const Engine& engine_;
  std::vector<ObservableSpec> f_;
  std::uint64_t seed_;
};

/// Closed forms of the needed cumulants as functions of the disorder (Gaussian engine).
struct GaussianForms {
  std::vector<std::vector<LinearForm>> by_order;  // index: order
};

GaussianForms build_forms(const GaussianEngine& engine, std::span<const ObservableSpec> f,
                          int max_order) {
  GaussianForms forms;
  const auto& lattice = engine.lattice();
  const int n = engine.params().N;
  const std::size_t slots = lattice.volume() * static_cast<std::size_t>(n);
  forms.by_order.resize(max_order + 1);
  forms.by_order[0] = {engine.cumulant_form(f)};
  std::vector<std::size_t> momenta;
  std::vector<int> comps;
  for (int l = 1; l <= max_order; ++l) {
    const std::size_t grid = grid_size(slots, l);
    forms.by_order[l].reserve(grid);
    for (std::size_t idx = 0; idx < grid; ++idx) {
      decode_slots(idx, slots, n, l, momenta, comps);
      forms.by_order[l].push_back(engine.cumulant_form(w_observables(momenta, comps, f)));
    }
  }
  return forms;
}

/// Per-query outcome: either closed-form values or per-outer-sample statistics
/// laid out as (split-half estimate, plain squared mean) per query.
struct GammaData {
  std::optional<CollectedStatistics> collected;
  std::vector<double> exact;
  std::size_t inner_samples = 0;
};

void check_query(const Query& q, std::size_t k) {
  if (!(q.t >= 0.0 && q.t <= 1.0)) throw std::invalid_argument("t must lie in [0, 1]");
  if (q.order < 0) throw std::invalid_argument("derivative order must be >= 0");
  if (q.order + static_cast<int>(k) > kMaxCumulantOrder)
    throw std::invalid_argument("derivative order l plus k must not exceed 6");
}

GammaData evaluate_queries(const Engine& engine, std::span<const ObservableSpec> f,
                           const GammaConfig& config, std::span<const Query> queries) {
  if (f.empty()) throw std::invalid_argument("need at least one observable f (k >= 1)");
  const auto& lattice = engine_lattice(engine);
  const auto& params = engine_params(engine);
  const int n_comp = params.N;
  for (const auto& o : f) validate(o, lattice, n_comp);
  int max_order = 0;
  for (const auto& q : queries) {
    check_query(q, f.size());
    max_order = std::max(max_order, q.order);
  }
  const double bh2 = params.beta * params.beta * params.h * params.h;
  std::vector<double> scale(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) scale[i] = std::pow(bh2, queries[i].order);

  GammaData data;
  const bool inner_analytic = std::holds_alternative<AnalyticAveraging>(config.inner);
  const bool outer_analytic = std::holds_alternative<AnalyticAveraging>(config.outer.mode);
  if (outer_analytic && !inner_analytic)
    throw std::invalid_argument("analytic outer averaging needs an analytic inner expectation");

  std::optional<GaussianForms> forms;
  if (inner_analytic) {
    const auto* g = std::get_if<GaussianEngine>(&engine);
    if (!g) throw std::invalid_argument("analytic inner expectation needs the Gaussian engine");
    forms = build_forms(*g, f, max_order);
  }

  if (outer_analytic) {
    // E|c + sqrt(t) b.g~|^2 = |c|^2 + t |b|^2
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto& list = forms->by_order[queries[i].order];
      std::vector<double> terms(list.size());
      for (std::size_t p = 0; p < list.size(); ++p)
        terms[p] = std::norm(list[p].constant) + queries[i].t * list[p].coefficient_norm2();
      data.exact.push_back(scale[i] * pairwise_sum(terms));
    }
    return data;
  }

  // Distinct t values with the orders they need.
  std::vector<double> ts;
  for (const auto& q : queries)
    if (std::find(ts.begin(), ts.end(), q.t) == ts.end()) ts.push_back(q.t);
  std::vector<std::vector<int>> orders_at(ts.size());
  std::vector<std::pair<std::size_t, std::size_t>> where(queries.size());  // (t slot, order slot)
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::size_t ti = std::find(ts.begin(), ts.end(), queries[i].t) - ts.begin();
    auto& os = orders_at[ti];
    auto it = std::find(os.begin(), os.end(), queries[i].order);
    if (it == os.end()) {
      os.push_back(queries[i].order);
      it = os.end() - 1;
    }
    where[i] = {ti, static_cast<std::size_t>(it - os.begin())};
  }

  const std::size_t dims = lattice.volume() * static_cast<std::size_t>(n_comp);
  std::size_t n_inner = 0;
  const auto* inner_mc = std::get_if<MonteCarloAveraging>(&config.inner);
  std::optional<GaussHermiteRule> inner_rule;
  if (inner_mc) {
    n_inner = inner_mc->samples;
    if (n_inner < 2 || n_inner % 2 != 0)
      throw std::invalid_argument("inner Monte Carlo needs an even sample count >= 2 (split halves)");
  } else if (const auto* gh = std::get_if<GaussHermiteAveraging>(&config.inner)) {
    n_inner = disorder_points(DisorderAverager{*gh}, dims);
    inner_rule = gauss_hermite(gh->nodes);
  }
  data.inner_samples = n_inner;

  auto statistic = [&](const DisorderSample& g, std::size_t outer) {
    std::vector<cplx> row(2 * queries.size());
    if (inner_analytic) {
      // E' of an affine form at G(t) replaces g~ by sqrt(t) g~.
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& list = forms->by_order[queries[i].order];
        const double st = std::sqrt(queries[i].t);
        std::vector<double> terms(list.size());
        for (std::size_t p = 0; p < list.size(); ++p) {
          const cplx v = list[p].constant + st * (list[p].evaluate(g.fourier()) - list[p].constant);
          terms[p] = std::norm(v);
        }
        const double val = scale[i] * pairwise_sum(terms);
        row[2 * i] = row[2 * i + 1] = val;
      }
      return row;
    }

    std::unique_ptr<InnerEvaluator> evaluator;
    if (const auto* exact = std::get_if<ExactEnumEngine>(&engine))
      evaluator = std::make_unique<ExactEvaluator>(*exact, f);
    else
      evaluator = std::make_unique<GenericEvaluator>(engine, f, config.sampler_seed);

    // acc[t][order slot][half][entry]; quadrature uses half 0 only.
    std::vector<std::vector<std::array<std::vector<cplx>, 2>>> acc(ts.size());
    for (std::size_t ti = 0; ti < ts.size(); ++ti) acc[ti].resize(orders_at[ti].size());
    std::vector<std::vector<cplx>> values;
    std::vector<double> point(dims);
    for (std::size_t j = 0; j < n_inner; ++j) {
      double w = 1.0;
      int half = 0;
      if (inner_mc) {
        auto rng = make_rng(inner_mc->base_seed, StreamTag::kInnerDisorder, {outer, j});
        std::normal_distribution<double> normal;
        for (auto& v : point) v = normal(rng);
        half = j < n_inner / 2 ? 0 : 1;
      } else {
        w = tensor_point(*inner_rule, dims, j, point.data());
      }
      const DisorderSample gp(lattice, n_comp, point, outer, j);
      for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        const double t = ts[ti];
        const auto field = DisorderSample::combine(std::sqrt(t), g, std::sqrt(1.0 - t), gp, outer, j);
        evaluator->evaluate(field, orders_at[ti], values);
        for (std::size_t o = 0; o < values.size(); ++o) {
          auto& target = acc[ti][o][half];
          if (target.empty()) target.assign(values[o].size(), 0.0);
          for (std::size_t e = 0; e < values[o].size(); ++e) target[e] += w * values[o][e];
        }
      }
    }

    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto [ti, oi] = where[i];
      const auto& a = acc[ti][oi][0];
      if (inner_mc) {
        const auto& b = acc[ti][oi][1];
        const double half_n = static_cast<double>(n_inner / 2);
        std::vector<double> split(a.size()), plain(a.size());
        for (std::size_t e = 0; e < a.size(); ++e) {
          const cplx ma = a[e] / half_n, mb = b[e] / half_n;
          split[e] = (ma * std::conj(mb)).real();
          plain[e] = std::norm(0.5 * (ma + mb));
        }
        row[2 * i] = scale[i] * pairwise_sum(split);
        row[2 * i + 1] = scale[i] * pairwise_sum(plain);
      } else {
        std::vector<double> sq(a.size());
        for (std::size_t e = 0; e < a.size(); ++e) sq[e] = std::norm(a[e]);
        row[2 * i] = row[2 * i + 1] = scale[i] * pairwise_sum(sq);
      }
    }
    return row;
  };

  data.collected = collect_statistics(lattice, n_comp, config.outer, statistic);
  return data;
}

/// sum_i weights[i] * query_i, with its error and inner-bias estimate.
GammaEstimate combine(const GammaData& data, std::span<const double> weights) {
  GammaEstimate out;
  out.inner_samples = data.inner_samples;
  if (!data.collected) {
    std::vector<double> terms(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) terms[i] = weights[i] * data.exact[i];
    out.value = pairwise_sum(terms);
    return out;
  }
  const auto jk = data.collected->reduce([&](std::span<const cplx> m) {
    double v = 0.0, bias = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] == 0.0) continue;
      v += weights[i] * m[2 * i].real();
      bias += weights[i] * (m[2 * i + 1].real() - m[2 * i].real());
    }
    return std::vector<double>{v, bias};
  });
  out.value = jk.value[0];
  out.stderr = jk.stderr[0];
  out.inner_bias = jk.value[1];
  out.outer_samples = data.collected->samples;
  return out;
}

GammaEstimate single(const GammaData& data, std::size_t n, std::size_t index) {
  std::vector<double> w(n, 0.0);
  w[index] = 1.0;
  return combine(data, w);
}

}  // namespace

GammaEstimate gamma_value(const Engine& engine, double t, std::span<const ObservableSpec> f,
                          const GammaConfig& config) {
  const Query q[1] = {{t, 0}};
  return single(evaluate_queries(engine, f, config, q), 1, 0);
}

GammaEstimate gamma_derivative(const Engine& engine, double t, int l,
                               std::span<const ObservableSpec> f, const GammaConfig& config) {
  if (l < 1) throw std::invalid_argument("derivative order l must be >= 1");
  const Query q[1] = {{t, l}};
  return single(evaluate_queries(engine, f, config, q), 1, 0);
}

InequalityReport check_lemma2(const Engine& engine, double t1, double t2, int j, int l,
                              std::span<const ObservableSpec> f, const GammaConfig& config) {
  if (!(t1 >= 0.0 && t1 < t2 && t2 <= 1.0))
    throw std::invalid_argument("need 0 <= t1 < t2 <= 1");
  if (j < 0 || l < 0) throw std::invalid_argument("j and l must be non-negative");
  const Query q[2] = {{t1, j + l}, {t2, j}};
  const auto data = evaluate_queries(engine, f, config, q);
  double fact = 1.0;
  for (int i = 2; i <= l; ++i) fact *= i;
  const double width = std::pow(t2 - t1, l);

  const double wl[2] = {width, 0.0}, wr[2] = {0.0, fact}, wd[2] = {-width, fact};
  const auto lhs = combine(data, wl), rhs = combine(data, wr), diff = combine(data, wd);

  InequalityReport report;
  report.name = "lemma2";
  report.labels = {"lhs", "rhs"};
  report.values = {lhs.value, rhs.value};
  report.errors = {lhs.stderr, rhs.stderr};
  auto m = assess_margin("rhs - lhs", diff.value, diff.stderr,
                         std::max(std::abs(lhs.value), std::abs(rhs.value)));
  report.verdict = m.verdict;
  report.margins.push_back(std::move(m));
  report.samples = lhs.outer_samples;
  report.metadata = {{"t1", std::to_string(t1)}, {"t2", std::to_string(t2)},
                     {"j", std::to_string(j)},   {"l", std::to_string(l)},
                     {"engine", engine_name(engine)}, {"inner", averaging_name(config.inner)},
                     {"outer", averaging_name(config.outer.mode)}};
  return report;
}

GammaPath gamma_path(const Engine& engine, std::span<const double> t_grid,
                     std::span<const ObservableSpec> f, const GammaConfig& config, double fd_step) {
  if (t_grid.size() < 2) throw std::invalid_argument("gamma path needs at least two t values");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
      std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end())
    throw std::invalid_argument("t grid must be strictly increasing");
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");

  const std::size_t n = t_grid.size();
  std::vector<Query> queries;
  for (double t : t_grid) queries.push_back({t, 0});
  for (double t : t_grid) queries.push_back({t, 1});
  std::vector<std::pair<std::size_t, std::size_t>> fd_index(n, {SIZE_MAX, SIZE_MAX});
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_grid[i];
    if (t - fd_step < 0.0 || t + fd_step > 1.0) continue;
    fd_index[i] = {queries.size(), queries.size() + 1};
    queries.push_back({t - fd_step, 0});
    queries.push_back({t + fd_step, 0});
  }
  const auto data = evaluate_queries(engine, f, config, queries);
  const std::size_t nq = queries.size();
  auto unit = [&](std::size_t i) { return single(data, nq, i); };

  GammaPath path;
  path.t.assign(t_grid.begin(), t_grid.end());
  path.fd_step = fd_step;
  for (std::size_t i = 0; i < n; ++i) {
    path.gamma.push_back(unit(i));
    path.derivative.push_back(unit(n + i));
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<double> w(nq, 0.0);
    w[i + 1] = 1.0;
    w[i] = -1.0;
    const auto d = combine(data, w);
    const double scale = std::max(path.gamma[i].value, path.gamma[i + 1].value);
    path.monotone.push_back(assess_margin("gamma(" + std::to_string(t_grid[i + 1]) + ") - gamma(" +
                                              std::to_string(t_grid[i]) + ")",
                                          d.value, d.stderr, scale));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    std::vector<double> w(nq, 0.0);
    const double h1 = t_grid[i] - t_grid[i - 1], h2 = t_grid[i + 1] - t_grid[i];
    w[i + 1] = 1.0 / h2;
    w[i] = -1.0 / h2 - 1.0 / h1;
    w[i - 1] = 1.0 / h1;
    const auto d = combine(data, w);
    const double scale = (std::abs(path.gamma[i + 1].value) + std::abs(path.gamma[i].value)) / h2 +
                         (std::abs(path.gamma[i].value) + std::abs(path.gamma[i - 1].value)) / h1;
    path.convex.push_back(assess_margin("convexity at t = " + std::to_string(t_grid[i]), d.value,
                                        d.stderr, scale));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (fd_index[i].first == SIZE_MAX) {
      path.finite_difference.push_back(std::numeric_limits<double>::quiet_NaN());
      path.finite_difference_stderr.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    std::vector<double> w(nq, 0.0);
    w[fd_index[i].second] = 0.5 / fd_step;
    w[fd_index[i].first] = -0.5 / fd_step;
    const auto fd = combine(data, w);
    path.finite_difference.push_back(fd.value);
    path.finite_difference_stderr.push_back(fd.stderr);
    w[n + i] -= 1.0;
    const auto d = combine(data, w);
    path.lemma1.push_back(assess_equality("lemma1 vs finite difference at t = " + std::to_string(t_grid[i]),
                                          d.value, d.stderr,
                                          std::max(std::abs(fd.value), std::abs(path.derivative[i].value)),
                                          1e-8));
  }
  path.verdict = Verdict::kHolds;
  for (const auto* list : {&path.monotone, &path.convex, &path.lemma1})
    for (const auto& m : *list) path.verdict = worst(path.verdict, m.verdict);
  return path;
}

std::string gamma_csv(const GammaPath& data) {
  std::ostringstream out;
  out.precision(17);
  out << "t,gamma,stderr,dgamma_lemma1,stderr\n";
  for (std::size_t i = 0; i < data.t.size(); ++i)
    out << data.t[i] << ',' << data.gamma[i].value << ',' << data.gamma[i].stderr << ','
        << data.derivative[i].value << ',' << data.derivative[i].stderr << '\n';
  return out.str();
}

void write_gamma_csv(const std::filesystem::path& path, const GammaPath& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << gamma_csv(data);
}

}  // namespace rfon
