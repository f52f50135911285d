#include "rfon/experiment.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rfon/averaging.hpp"
#include "rfon/largen.hpp"

namespace rfon {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw std::invalid_argument("unknown field '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(where + "." + key + ": " + e.what());
  }
}

ordered_json schedule_json(const McmcSchedule& s) {
  ordered_json j;
  j["thermalization"] = s.thermalization;
  j["measurements"] = s.measurements;
  j["stride"] = s.stride;
  j["proposal_width"] = s.proposal_width;
  j["overrelaxation"] = s.overrelaxation;
  j["blocks"] = s.blocks;
  return j;
}

McmcSchedule schedule_from(const json& j) {
  const std::string w = "engine.schedule";
  check_keys(j, w, {"thermalization", "measurements", "stride", "proposal_width", "overrelaxation", "blocks"});
  McmcSchedule s;
  read(j, "thermalization", s.thermalization, w);
  read(j, "measurements", s.measurements, w);
  read(j, "stride", s.stride, w);
  read(j, "proposal_width", s.proposal_width, w);
  read(j, "overrelaxation", s.overrelaxation, w);
  read(j, "blocks", s.blocks, w);
  return s;
}

ordered_json disorder_json(const DisorderBlock& b) {
  ordered_json j;
  j["mode"] = b.mode;
  j["n_samples"] = b.n_samples;
  j["base_seed"] = b.base_seed;
  j["nodes"] = b.nodes;
  j["max_blocks"] = b.max_blocks;
  return j;
}

DisorderBlock disorder_from(const json& j, const std::string& w, DisorderBlock b) {
  check_keys(j, w, {"mode", "n_samples", "base_seed", "nodes", "max_blocks"});
  read(j, "mode", b.mode, w);
  read(j, "n_samples", b.n_samples, w);
  read(j, "base_seed", b.base_seed, w);
  read(j, "nodes", b.nodes, w);
  read(j, "max_blocks", b.max_blocks, w);
  if (b.mode != "monte_carlo" && b.mode != "gauss_hermite" && b.mode != "analytic")
    throw std::invalid_argument(w + ".mode must be monte_carlo, gauss_hermite or analytic");
  return b;
}

ordered_json observables_json(const std::vector<ObservableEntry>& f) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : f) {
    ordered_json j;
    j["kind"] = e.kind;
    j["index"] = e.index;
    j["n"] = e.n;
    arr.push_back(j);
  }
  return arr;
}

std::vector<ObservableEntry> observables_from(const json& j, const std::string& w) {
  if (!j.is_array()) throw std::invalid_argument(w + " must be an array");
  std::vector<ObservableEntry> out;
  for (const auto& item : j) {
    check_keys(item, w + "[]", {"kind", "index", "n"});
    ObservableEntry e;
    read(item, "kind", e.kind, w);
    read(item, "index", e.index, w);
    read(item, "n", e.n, w);
    if (e.kind != "momentum" && e.kind != "position")
      throw std::invalid_argument(w + "[].kind must be momentum or position");
    out.push_back(e);
  }
  return out;
}

struct TaskJson {
  ordered_json operator()(const CheckSsTask& t) const {
    ordered_json j;
    j["name"] = "check-ss";
    j["q"] = t.q;
    j["m"] = t.m;
    j["n"] = t.n;
    return j;
  }
  ordered_json operator()(const CheckTheoremTask& t) const {
    ordered_json j;
    j["name"] = "check-theorem";
    j["k"] = t.k;
    j["l"] = t.l;
    j["f"] = observables_json(t.f);
    return j;
  }
  ordered_json operator()(const GammaPathTask& t) const {
    ordered_json j;
    j["name"] = "gamma-path";
    j["t_grid"] = t.t_grid;
    j["f"] = observables_json(t.f);
    j["inner"] = disorder_json(t.inner);
    j["fd_step"] = t.fd_step;
    return j;
  }
  ordered_json operator()(const Lemma2Task& t) const {
    ordered_json j;
    j["name"] = "lemma2";
    j["t1"] = t.t1;
    j["t2"] = t.t2;
    j["j"] = t.j;
    j["l"] = t.l;
    j["f"] = observables_json(t.f);
    j["inner"] = disorder_json(t.inner);
    return j;
  }
  ordered_json operator()(const LargeNTask& t) const {
    ordered_json j;
    j["name"] = "largen";
    j["d"] = t.d;
    j["N"] = t.N;
    j["betaDeltaG"] = t.beta_delta_g;
    j["q_min"] = t.q_min;
    j["q_max"] = t.q_max;
    j["q_points"] = t.q_points;
    return j;
  }
  ordered_json operator()(const SaddleTask& t) const {
    ordered_json j;
    j["name"] = "saddle";
    j["beta"] = t.beta;
    j["betaDeltaG"] = t.beta_delta_g;
    j["d"] = t.d;
    j["L"] = t.L;
    j["zero_mode"] = t.zero_mode;
    j["planted_m2"] = t.planted_m2 ? ordered_json(*t.planted_m2) : ordered_json(nullptr);
    return j;
  }
  ordered_json operator()(const SimulateTask& t) const {
    ordered_json j;
    j["name"] = "simulate";
    j["f"] = observables_json(t.f);
    return j;
  }
};

TaskBlock task_from(const json& j) {
  if (!j.is_object() || !j.contains("name")) throw std::invalid_argument("task block needs a name");
  const std::string name = j.at("name").get<std::string>();
  TaskBlock task = default_task(name);
  const std::string w = "task";
  if (auto* t = std::get_if<CheckSsTask>(&task)) {
    check_keys(j, w, {"name", "q", "m", "n"});
    read(j, "q", t->q, w);
    read(j, "m", t->m, w);
    read(j, "n", t->n, w);
  } else if (auto* t = std::get_if<CheckTheoremTask>(&task)) {
    check_keys(j, w, {"name", "k", "l", "f"});
    read(j, "k", t->k, w);
    read(j, "l", t->l, w);
    if (j.contains("f")) t->f = observables_from(j.at("f"), "task.f");
  } else if (auto* t = std::get_if<GammaPathTask>(&task)) {
    check_keys(j, w, {"name", "t_grid", "f", "inner", "fd_step"});
    read(j, "t_grid", t->t_grid, w);
    read(j, "fd_step", t->fd_step, w);
    if (j.contains("f")) t->f = observables_from(j.at("f"), "task.f");
    if (j.contains("inner")) t->inner = disorder_from(j.at("inner"), "task.inner", t->inner);
  } else if (auto* t = std::get_if<Lemma2Task>(&task)) {
    check_keys(j, w, {"name", "t1", "t2", "j", "l", "f", "inner"});
    read(j, "t1", t->t1, w);
    read(j, "t2", t->t2, w);
    read(j, "j", t->j, w);
    read(j, "l", t->l, w);
    if (j.contains("f")) t->f = observables_from(j.at("f"), "task.f");
    if (j.contains("inner")) t->inner = disorder_from(j.at("inner"), "task.inner", t->inner);
  } else if (auto* t = std::get_if<LargeNTask>(&task)) {
    check_keys(j, w, {"name", "d", "N", "betaDeltaG", "q_min", "q_max", "q_points"});
    read(j, "d", t->d, w);
    read(j, "N", t->N, w);
    read(j, "betaDeltaG", t->beta_delta_g, w);
    read(j, "q_min", t->q_min, w);
    read(j, "q_max", t->q_max, w);
    read(j, "q_points", t->q_points, w);
  } else if (auto* t = std::get_if<SaddleTask>(&task)) {
    check_keys(j, w, {"name", "beta", "betaDeltaG", "d", "L", "zero_mode", "planted_m2"});
    read(j, "beta", t->beta, w);
    read(j, "betaDeltaG", t->beta_delta_g, w);
    read(j, "d", t->d, w);
    read(j, "L", t->L, w);
    read(j, "zero_mode", t->zero_mode, w);
    if (j.contains("planted_m2") && !j.at("planted_m2").is_null())
      t->planted_m2 = j.at("planted_m2").get<double>();
    if (t->zero_mode != "include" && t->zero_mode != "exclude")
      throw std::invalid_argument("task.zero_mode must be include or exclude");
  } else if (auto* t = std::get_if<SimulateTask>(&task)) {
    check_keys(j, w, {"name", "f"});
    if (j.contains("f")) t->f = observables_from(j.at("f"), "task.f");
  }
  return task;
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

ordered_json optional_number(std::optional<double> v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json margin_json(const MarginCheck& m) {
  ordered_json j;
  j["name"] = m.name;
  j["difference"] = m.difference;
  j["stderr"] = m.stderr;
  j["sigma"] = optional_number(m.sigma);
  j["verdict"] = verdict_name(m.verdict);
  return j;
}

ordered_json inequality_json(const InequalityReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["labels"] = r.labels;
  j["values"] = r.values;
  j["errors"] = r.errors;
  j["margins"] = ordered_json::array();
  for (const auto& m : r.margins) j["margins"].push_back(margin_json(m));
  j["extra"] = ordered_json::array();
  for (const auto& m : r.extra) j["extra"].push_back(margin_json(m));
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  j["metadata"] = meta;
  j["samples"] = r.samples;
  j["verdict"] = verdict_name(r.verdict);
  return j;
}

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// Accumulates the flat value/margin lists shared by every report.
struct Flat {
  std::vector<std::string> labels;
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<MarginCheck> margins;

  void add_value(std::string label, double value, double error) {
    labels.push_back(std::move(label));
    values.push_back(value);
    errors.push_back(error);
  }
  void add_report(const InequalityReport& r, const std::string& prefix) {
    for (std::size_t i = 0; i < r.values.size(); ++i)
      add_value(prefix + r.labels[i], r.values[i], i < r.errors.size() ? r.errors[i] : 0.0);
    for (auto m : r.margins) {
      m.name = prefix + m.name;
      margins.push_back(std::move(m));
    }
  }
  void write(ordered_json& doc) const {
    doc["labels"] = labels;
    doc["values"] = values;
    doc["errors"] = errors;
    ordered_json sig = ordered_json::array();
    ordered_json all = ordered_json::array();
    for (const auto& m : margins) {
      sig.push_back(optional_number(m.sigma));
      all.push_back(margin_json(m));
    }
    doc["margins_sigma"] = sig;
    doc["margins"] = all;
  }
  std::string values_csv() const {
    std::string out = "label,value,stderr\n";
    for (std::size_t i = 0; i < values.size(); ++i)
      out += labels[i] + "," + format_number(values[i]) + "," + format_number(errors[i]) + "\n";
    return out;
  }
  std::string margins_csv() const {
    std::string out = "name,difference,stderr,sigma,verdict\n";
    for (const auto& m : margins)
      out += m.name + "," + format_number(m.difference) + "," + format_number(m.stderr) + "," +
             (m.sigma ? format_number(*m.sigma) : "") + "," + verdict_name(m.verdict) + "\n";
    return out;
  }
};

std::vector<ObservableSpec> make_observables(const std::vector<ObservableEntry>& f) {
  std::vector<ObservableSpec> out;
  for (const auto& e : f) out.push_back(make_observable(e));
  return out;
}

AveragingMode averaging_mode(const DisorderBlock& b) {
  if (b.mode == "monte_carlo") return MonteCarloAveraging{b.n_samples, b.base_seed};
  if (b.mode == "gauss_hermite") return GaussHermiteAveraging{b.nodes};
  if (b.mode == "analytic") return AnalyticAveraging{};
  throw std::invalid_argument("unknown averaging mode " + b.mode);
}

void standard_tables(ExperimentReport& report, const Flat& flat) {
  report.tables.push_back({report.task + "_values.csv", flat.values_csv()});
  report.tables.push_back({report.task + "_margins.csv", flat.margins_csv()});
}

void run_check_ss(const ExperimentConfig& cfg, const CheckSsTask& t, unsigned workers,
                  ExperimentReport& report) {
  const Engine engine = make_engine(cfg);
  const auto averager = make_averager(cfg.disorder, workers);
  std::vector<std::size_t> qs = t.q;
  if (qs.empty())
    for (std::size_t k = 0; k < engine_lattice(engine).volume(); ++k) qs.push_back(k);
  Flat flat;
  Verdict verdict = Verdict::kHolds;
  ordered_json details = ordered_json::array();
  for (std::size_t q : qs) {
    const auto r = check_schwartz_soffer(engine, averager, q, t.m, t.n, cfg.sampler_seed);
    flat.add_report(r, "q" + std::to_string(q) + ".");
    verdict = worst(verdict, r.verdict);
    details.push_back(inequality_json(r));
  }
  flat.write(report.document);
  report.document["details"] = details;
  report.verdict = verdict;
  standard_tables(report, flat);
}

void run_check_theorem(const ExperimentConfig& cfg, const CheckTheoremTask& t, unsigned workers,
                       ExperimentReport& report) {
  if (t.k != static_cast<int>(t.f.size()))
    throw std::invalid_argument("task.k = " + std::to_string(t.k) + " but task.f lists " +
                                std::to_string(t.f.size()) + " observables");
  const Engine engine = make_engine(cfg);
  const auto f = make_observables(t.f);
  const auto r = check_theorem_chain(engine, make_averager(cfg.disorder, workers), t.l, f,
                                     cfg.sampler_seed);
  Flat flat;
  flat.add_report(r, "");
  flat.write(report.document);
  report.document["details"] = inequality_json(r);
  report.verdict = r.verdict;
  standard_tables(report, flat);
}

void run_gamma_path(const ExperimentConfig& cfg, const GammaPathTask& t, unsigned workers,
                    ExperimentReport& report) {
  const Engine engine = make_engine(cfg);
  const auto f = make_observables(t.f);
  const GammaConfig gc{make_averager(cfg.disorder, workers), averaging_mode(t.inner), cfg.sampler_seed};
  const auto path = gamma_path(engine, t.t_grid, f, gc, t.fd_step);
  Flat flat;
  for (std::size_t i = 0; i < path.t.size(); ++i)
    flat.add_value("gamma(" + format_number(path.t[i]) + ")", path.gamma[i].value, path.gamma[i].stderr);
  for (std::size_t i = 0; i < path.t.size(); ++i)
    flat.add_value("dgamma(" + format_number(path.t[i]) + ")", path.derivative[i].value,
                   path.derivative[i].stderr);
  for (const auto* group : {&path.monotone, &path.convex, &path.lemma1})
    for (const auto& m : *group) flat.margins.push_back(m);
  flat.write(report.document);
  ordered_json details;
  details["t"] = path.t;
  details["finite_difference"] = ordered_json::array();
  for (std::size_t i = 0; i < path.t.size(); ++i)
    details["finite_difference"].push_back(std::isfinite(path.finite_difference[i])
                                               ? ordered_json(path.finite_difference[i])
                                               : ordered_json(nullptr));
  details["fd_step"] = path.fd_step;
  details["inner_bias"] = ordered_json::array();
  for (const auto& g : path.gamma) details["inner_bias"].push_back(g.inner_bias);
  details["outer_samples"] = path.gamma.empty() ? 0 : path.gamma.front().outer_samples;
  details["inner_samples"] = path.gamma.empty() ? 0 : path.gamma.front().inner_samples;
  report.document["details"] = details;
  report.verdict = path.verdict;
  report.tables.push_back({"gamma_path.csv", gamma_csv(path)});
  report.tables.push_back({"gamma_path_margins.csv", flat.margins_csv()});
}

void run_lemma2(const ExperimentConfig& cfg, const Lemma2Task& t, unsigned workers,
                ExperimentReport& report) {
  const Engine engine = make_engine(cfg);
  const auto f = make_observables(t.f);
  const GammaConfig gc{make_averager(cfg.disorder, workers), averaging_mode(t.inner), cfg.sampler_seed};
  const auto r = check_lemma2(engine, t.t1, t.t2, t.j, t.l, f, gc);
  Flat flat;
  flat.add_report(r, "");
  flat.write(report.document);
  report.document["details"] = inequality_json(r);
  report.verdict = r.verdict;
  standard_tables(report, flat);
}

void run_largen(const LargeNTask& t, ExperimentReport& report) {
  const auto grid = log_grid(t.q_min, t.q_max, t.q_points);
  const auto r = exponents_and_checks(t.d, t.N, t.beta_delta_g, grid);
  auto& doc = report.document;
  ordered_json input;
  input["d"] = t.d;
  input["N"] = t.N;
  input["betaDeltaG"] = t.beta_delta_g;
  input["q_grid"] = grid;
  ordered_json coeff;
  coeff["c0"] = optional_number(r.coefficients.c0);
  coeff["c1"] = r.coefficients.c1;
  coeff["c2"] = r.coefficients.c2;
  coeff["c3"] = r.coefficients.c3;
  ordered_json ex;
  ex["eta"] = r.exponents.eta;
  ex["etaBar"] = r.exponents.eta_bar;
  ex["etaPrime"] = r.exponents.eta_prime;
  ordered_json checks = ordered_json::array();
  {
    ordered_json c;
    c["name"] = "exponent_bound";
    c["lhs"] = r.exponents.eta_bar;
    c["rhs"] = 2.0 * r.exponents.eta;
    c["pass"] = r.schwartz_soffer;
    c["gating"] = true;
    checks.push_back(c);
  }
  bool violated = !r.schwartz_soffer, breakdown = false;
  for (const auto& c : r.checks) {
    ordered_json j;
    j["name"] = c.name;
    j["q"] = c.q;
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    j["pass"] = c.pass;
    j["breakdown"] = c.breakdown;
    j["gating"] = c.gating;
    checks.push_back(j);
    if (c.gating && !c.pass) (c.breakdown ? breakdown : violated) = true;
  }
  doc["input"] = input;
  doc["coefficients"] = coeff;
  doc["exponents"] = ex;
  doc["checks"] = checks;

  Flat flat;
  flat.add_value("eta", r.exponents.eta, 0.0);
  flat.add_value("etaBar", r.exponents.eta_bar, 0.0);
  flat.add_value("etaPrime", r.exponents.eta_prime, 0.0);
  flat.add_value("c1", r.coefficients.c1, 0.0);
  flat.add_value("c2", r.coefficients.c2, 0.0);
  flat.add_value("c3", r.coefficients.c3, 0.0);
  if (r.coefficients.c0) flat.add_value("c0", *r.coefficients.c0, 0.0);
  flat.write(doc);
  report.verdict = violated ? Verdict::kViolated : breakdown ? Verdict::kInconclusive : Verdict::kHolds;

  std::string corr = "q,log_factor,connected_2pt,disconnected_2pt,disconnected_4pt,connected_4pt,"
                     "susceptibility_variance,susceptibility_lower\n";
  for (const auto& a : r.correlators)
    corr += format_number(a.q) + "," + format_number(a.log_factor) + "," + format_number(a.connected_2pt) +
            "," + format_number(a.disconnected_2pt) + "," + format_number(a.disconnected_4pt) + "," +
            format_number(a.connected_4pt) + "," + format_number(a.susceptibility_variance) + "," +
            format_number(a.susceptibility_lower) + "\n";
  std::string chk = "name,q,lhs,rhs,pass,breakdown,gating\n";
  for (const auto& c : r.checks)
    chk += c.name + "," + format_number(c.q) + "," + format_number(c.lhs) + "," + format_number(c.rhs) +
           "," + (c.pass ? "true" : "false") + "," + (c.breakdown ? "true" : "false") + "," +
           (c.gating ? "true" : "false") + "\n";
  report.tables.push_back({"largen_correlators.csv", corr});
  report.tables.push_back({"largen_checks.csv", chk});
}

void run_saddle(const SaddleTask& t, ExperimentReport& report) {
  const Lattice lattice(t.d, t.L);
  const ZeroMode zm = t.zero_mode == "exclude" ? ZeroMode::kExclude : ZeroMode::kInclude;
  const double beta = t.planted_m2 ? saddle_rhs(lattice, *t.planted_m2, t.beta_delta_g, zm) : t.beta;
  Flat flat;
  flat.add_value("beta", beta, 0.0);
  ordered_json details;
  details["zero_mode"] = t.zero_mode;
  try {
    const auto s = solve_saddle(beta, t.beta_delta_g, lattice, zm);
    flat.add_value("m2", s.m2, 0.0);
    flat.add_value("residual", s.residual, 0.0);
    details["status"] = "solved";
    details["iterations"] = s.iterations;
    if (t.planted_m2) {
      flat.add_value("planted_m2", *t.planted_m2, 0.0);
      flat.margins.push_back(assess_equality("m2 - planted_m2", s.m2 - *t.planted_m2, 0.0, 1.0, 1e-8));
    }
    report.verdict = Verdict::kHolds;
    for (const auto& m : flat.margins) report.verdict = worst(report.verdict, m.verdict);
  } catch (const NoSaddleSolution& e) {
    details["status"] = "no_solution";
    details["critical_beta"] = e.critical_beta();
    details["message"] = e.what();
    report.verdict = Verdict::kInconclusive;
  }
  flat.write(report.document);
  report.document["details"] = details;
  standard_tables(report, flat);
}

void run_simulate(const ExperimentConfig& cfg, const SimulateTask& t, unsigned workers,
                  ExperimentReport& report) {
  const Engine engine = make_engine(cfg);
  const Lattice& lattice = engine_lattice(engine);
  const int n = engine_params(engine).N;
  const auto f = make_observables(t.f);
  const auto averager = make_averager(cfg.disorder, workers);
  const std::size_t m = f.size();
  const auto collected = collect_statistics(
      lattice, n, averager, [&](const DisorderSample& g, std::size_t) {
        const auto state = gibbs_state(engine, g, cfg.sampler_seed);
        std::vector<cplx> row;
        for (const auto& spec : f) {
          const std::vector<ObservableSpec> one{spec};
          const std::vector<ObservableSpec> pair{spec, conjugate(spec, lattice)};
          const cplx mean = state->cumulant(one).value;
          row.push_back(mean);
          row.push_back(std::norm(mean));
          row.push_back(state->cumulant(pair).value);
        }
        return row;
      });
  const auto jk = collected.reduce([&](std::span<const cplx> means) {
    std::vector<double> out;
    for (std::size_t i = 0; i < m; ++i) {
      out.push_back(means[3 * i].real());
      out.push_back(means[3 * i].imag());
      out.push_back(means[3 * i + 1].real());
      out.push_back(means[3 * i + 2].real());
    }
    return out;
  });
  Flat flat;
  const char* names[] = {"mean_re", "mean_im", "mean_abs2", "connected"};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < 4; ++c)
      flat.add_value(describe(f[i]) + "." + names[c], jk.value[4 * i + c], jk.stderr[4 * i + c]);
  flat.write(report.document);
  report.document["samples"] = collected.samples;
  report.verdict = Verdict::kHolds;
  standard_tables(report, flat);
}

}  // namespace

std::string task_name(const TaskBlock& task) {
  return std::visit([](const auto& t) { return TaskJson{}(t)["name"].template get<std::string>(); }, task);
}

TaskBlock default_task(const std::string& name) {
  if (name == "check-ss") return CheckSsTask{};
  if (name == "check-theorem") return CheckTheoremTask{};
  if (name == "gamma-path") return GammaPathTask{};
  if (name == "lemma2") return Lemma2Task{};
  if (name == "largen") return LargeNTask{};
  if (name == "saddle") return SaddleTask{};
  if (name == "simulate") return SimulateTask{};
  throw std::invalid_argument("unknown task '" + name +
                              "' (expected check-ss, check-theorem, gamma-path, lemma2, largen, "
                              "saddle or simulate)");
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  ordered_json model;
  model["d"] = c.model.d;
  model["L"] = c.model.L;
  model["N"] = c.model.N;
  model["beta"] = c.model.beta;
  model["h"] = c.model.h;
  model["J"] = c.model.J;
  model["measure"] = c.model.measure;
  model["u"] = c.model.u;
  model["mu"] = c.model.mu;
  j["model"] = model;
  ordered_json engine;
  engine["variant"] = c.engine.variant;
  engine["schedule"] = schedule_json(c.engine.schedule);
  j["engine"] = engine;
  j["disorder"] = disorder_json(c.disorder);
  j["sampler_seed"] = c.sampler_seed;
  j["task"] = std::visit(TaskJson{}, c.task);
  ordered_json output;
  output["dir"] = c.output.dir;
  output["format"] = c.output.format;
  j["output"] = output;
  return j;
}

ExperimentConfig config_from_json(const json& doc) {
  check_keys(doc, "config", {"model", "engine", "disorder", "sampler_seed", "task", "output"});
  ExperimentConfig c;
  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    const std::string w = "model";
    check_keys(m, w, {"d", "L", "N", "beta", "h", "J", "measure", "u", "mu"});
    read(m, "d", c.model.d, w);
    read(m, "L", c.model.L, w);
    read(m, "N", c.model.N, w);
    read(m, "beta", c.model.beta, w);
    read(m, "h", c.model.h, w);
    read(m, "J", c.model.J, w);
    read(m, "measure", c.model.measure, w);
    read(m, "u", c.model.u, w);
    read(m, "mu", c.model.mu, w);
    if (c.model.measure != "spherical" && c.model.measure != "quartic" &&
        c.model.measure != "gaussian_mass")
      throw std::invalid_argument("model.measure must be spherical, quartic or gaussian_mass");
  }
  if (doc.contains("engine")) {
    const auto& e = doc.at("engine");
    check_keys(e, "engine", {"variant", "schedule"});
    read(e, "variant", c.engine.variant, "engine");
    if (e.contains("schedule")) c.engine.schedule = schedule_from(e.at("schedule"));
    if (c.engine.variant != "exact_enum" && c.engine.variant != "gaussian_analytic" &&
        c.engine.variant != "mcmc")
      throw std::invalid_argument("engine.variant must be exact_enum, gaussian_analytic or mcmc");
  }
  if (doc.contains("disorder")) c.disorder = disorder_from(doc.at("disorder"), "disorder", c.disorder);
  read(doc, "sampler_seed", c.sampler_seed, "config");
  if (doc.contains("task")) c.task = task_from(doc.at("task"));
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"dir", "format"});
    read(o, "dir", c.output.dir, "output");
    read(o, "format", c.output.format, "output");
    if (c.output.format != "json" && c.output.format != "csv")
      throw std::invalid_argument("output.format must be json or csv");
  }
  return c;
}

std::string save_config(const ExperimentConfig& config) { return config_to_json(config).dump(2) + "\n"; }

ExperimentConfig load_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream s;
  s << in.rdbuf();
  return load_config(s.str());
}

std::string config_digest(const ExperimentConfig& config) {
  auto j = config_to_json(config);
  j.erase("output");
  return sha256_hex(j.dump(2) + "\n");
}

Engine make_engine(const ExperimentConfig& config) {
  const Lattice lattice(config.model.d, config.model.L);
  ModelParams p;
  p.beta = config.model.beta;
  p.h = config.model.h;
  p.J = config.model.J;
  p.N = config.model.N;
  if (config.model.measure == "spherical") p.measure = Spherical{};
  else if (config.model.measure == "quartic") p.measure = Quartic{config.model.u};
  else p.measure = GaussianMass{config.model.mu};
  p.validate();
  if (config.engine.variant == "exact_enum") return ExactEnumEngine(lattice, p);
  if (config.engine.variant == "gaussian_analytic") return GaussianEngine(lattice, p);
  return McmcEngine(lattice, p, config.engine.schedule);
}

DisorderAverager make_averager(const DisorderBlock& block, unsigned workers) {
  return DisorderAverager{averaging_mode(block), workers, block.max_blocks};
}

ObservableSpec make_observable(const ObservableEntry& e) {
  if (e.kind == "momentum") return MomentumSpin{e.index, e.n};
  return PositionSpin{e.index, e.n};
}

ordered_json empty_report(const ExperimentConfig& config) {
  ordered_json doc;
  doc["task"] = task_name(config.task);
  doc["config_digest"] = config_digest(config);
  ordered_json seeds;
  seeds["disorder_base_seed"] = config.disorder.base_seed;
  seeds["sampler_seed"] = config.sampler_seed;
  if (const auto* g = std::get_if<GammaPathTask>(&config.task)) seeds["inner_base_seed"] = g->inner.base_seed;
  if (const auto* g = std::get_if<Lemma2Task>(&config.task)) seeds["inner_base_seed"] = g->inner.base_seed;
  doc["seeds"] = seeds;
  doc["labels"] = ordered_json::array();
  doc["values"] = ordered_json::array();
  doc["errors"] = ordered_json::array();
  doc["margins_sigma"] = ordered_json::array();
  doc["margins"] = ordered_json::array();
  doc["verdict"] = verdict_name(Verdict::kInconclusive);
  return doc;
}

ExperimentReport run_experiment(const ExperimentConfig& config, unsigned workers) {
  ExperimentReport report;
  report.task = task_name(config.task);
  report.document = empty_report(config);
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CheckSsTask>) run_check_ss(config, t, workers, report);
        else if constexpr (std::is_same_v<T, CheckTheoremTask>) run_check_theorem(config, t, workers, report);
        else if constexpr (std::is_same_v<T, GammaPathTask>) run_gamma_path(config, t, workers, report);
        else if constexpr (std::is_same_v<T, Lemma2Task>) run_lemma2(config, t, workers, report);
        else if constexpr (std::is_same_v<T, LargeNTask>) run_largen(t, report);
        else if constexpr (std::is_same_v<T, SaddleTask>) run_saddle(t, report);
        else run_simulate(config, t, workers, report);
      },
      config.task);
  if (report.document["values"].empty()) report.verdict = Verdict::kInconclusive;
  // Keep the verdict last for readability.
  report.document.erase("verdict");
  report.document["verdict"] = verdict_name(report.verdict);
  report.document["config"] = config_to_json(config);
  report.document["config"].erase("output");
  return report;
}

int exit_code(Verdict verdict) {
  switch (verdict) {
    case Verdict::kHolds: return 0;
    case Verdict::kViolated: return 2;
    case Verdict::kInconclusive: return 3;
  }
  return 1;
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& format) {
  if (format != "json" && format != "csv") throw std::invalid_argument("format must be json or csv");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
    written.push_back(p);
  };
  if (format == "json") {
    write(dir / (report.task + ".json"), report.document.dump(2) + "\n");
  } else {
    for (const auto& t : report.tables) write(dir / t.name, t.text);
  }
  return written;
}

}  // namespace rfon
