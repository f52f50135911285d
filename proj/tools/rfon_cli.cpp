#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "rfon/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::string out;
  std::string format;
  unsigned workers = 1;
  bool print_config = false;
};

int run(const std::string& task, const Options& opt) {
  rfon::ExperimentConfig config;
  if (!opt.config.empty()) {
    config = rfon::load_config_file(opt.config);
    if (rfon::task_name(config.task) != task)
      throw std::invalid_argument("config " + opt.config + " describes task '" +
                                  rfon::task_name(config.task) + "', not '" + task + "'");
  } else {
    config.task = rfon::default_task(task);
  }
  if (opt.seed) config.disorder.base_seed = *opt.seed;
  if (opt.samples) config.disorder.n_samples = *opt.samples;
  if (!opt.format.empty()) config.output.format = opt.format;

  std::string dir = opt.out;
  if (dir.empty()) dir = config.output.dir;
  if (dir.empty())
    if (const char* env = std::getenv("RFON_OUT_DIR")) dir = env;
  if (dir.empty()) dir = "rfon_out";

  if (opt.print_config) {
    std::cout << rfon::save_config(config);
    return 0;
  }
  const auto report = rfon::run_experiment(config, opt.workers);
  const auto written = rfon::emit_report(report, dir, config.output.format);
  std::cout << task << ": " << rfon::verdict_name(report.verdict) << " (config "
            << report.document["config_digest"].get<std::string>().substr(0, 12) << ")\n";
  for (const auto& p : written) std::cout << "  wrote " << p.string() << "\n";
  return rfon::exit_code(report.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-field O(N) model laboratory: correlation inequalities and large-N checks"};
  app.require_subcommand(1);
  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"check-ss", "Schwartz-Soffer chain at each listed momentum"},
      {"check-theorem", "lhs <= Var <= rhs chain for a (k, l) pair"},
      {"gamma-path", "gamma(t) on a grid with derivative, monotonicity and convexity checks"},
      {"lemma2", "(t2 - t1)^l gamma^(j+l)(t1) <= l! gamma^(j)(t2)"},
      {"largen", "large-N exponents, coefficients and asymptotic checks"},
      {"saddle", "solve the replica-symmetric gap equation on a lattice"},
      {"simulate", "disorder averages of <f>, |<f>|^2 and <f; f*>"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "disorder base seed (overrides the config)");
    sub->add_option("--samples", opt.samples, "disorder sample count (overrides the config)");
    sub->add_option("--out", opt.out, "output directory (default: $RFON_OUT_DIR, then ./rfon_out)");
    sub->add_option("--format", opt.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--print-config", opt.print_config, "print the effective config and exit");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string task = app.get_subcommands().front()->get_name();
  try {
    return run(task, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
