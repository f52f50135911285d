#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rfon/engines.hpp"
#include "rfon/inequalities.hpp"
#include "rfon/interpolation.hpp"

namespace rfon {

struct ModelBlock {
  int d = 1;
  int L = 4;
  int N = 1;
  double beta = 0.3;
  double h = 0.5;
  double J = 1.0;
  std::string measure = "spherical";  // spherical | quartic | gaussian_mass
  double u = 1.0;
  double mu = 4.0;
};

struct EngineBlock {
  std::string variant = "exact_enum";  // exact_enum | gaussian_analytic | mcmc
  McmcSchedule schedule;
};

struct DisorderBlock {
  std::string mode = "monte_carlo";  // monte_carlo | gauss_hermite | analytic
  std::size_t n_samples = 1000;
  std::uint64_t base_seed = 1;
  int nodes = 20;
  std::size_t max_blocks = 1000;
};

/// {"kind": "momentum" | "position", "index": q or x, "n": component}
struct ObservableEntry {
  std::string kind = "momentum";
  std::size_t index = 0;
  int n = 0;
};

struct CheckSsTask {
  std::vector<std::size_t> q;  // empty: every grid momentum
  int m = 0;
  int n = 0;
};

struct CheckTheoremTask {
  int k = 1;
  int l = 1;
  std::vector<ObservableEntry> f{ObservableEntry{}};
};

struct GammaPathTask {
  std::vector<double> t_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<ObservableEntry> f{ObservableEntry{}};
  DisorderBlock inner{"monte_carlo", 256, 2, 20, 1000};
  double fd_step = 0.005;
};

struct Lemma2Task {
  double t1 = 0.25;
  double t2 = 0.75;
  int j = 0;
  int l = 1;
  std::vector<ObservableEntry> f{ObservableEntry{}};
  DisorderBlock inner{"monte_carlo", 256, 2, 20, 1000};
};

struct LargeNTask {
  double d = 5.0;
  int N = 10;
  double beta_delta_g = 1.0;
  double q_min = 1e-3;
  double q_max = 1e-1;
  std::size_t q_points = 20;
};

struct SaddleTask {
  double beta = 0.5;
  double beta_delta_g = 1.0;
  int d = 3;
  int L = 8;
  std::string zero_mode = "include";  // include | exclude
  std::optional<double> planted_m2;     // when set, beta is replaced by RHS(planted_m2)
};

/// Disorder averages of <f_i>, |<f_i>|^2 and <f_i; f_i^*> for each listed observable.
struct SimulateTask {
  std::vector<ObservableEntry> f{ObservableEntry{}};
};

using TaskBlock = std::variant<CheckSsTask, CheckTheoremTask, GammaPathTask, Lemma2Task, LargeNTask,
                               SaddleTask, SimulateTask>;

struct OutputBlock {
  std::string dir;               // empty: command line or environment decides
  std::string format = "json";   // json | csv
};

struct ExperimentConfig {
  ModelBlock model;
  EngineBlock engine;
  DisorderBlock disorder;
  std::uint64_t sampler_seed = 0;
  TaskBlock task = CheckSsTask{};
  OutputBlock output;
};

/// Subcommand name of the task block (check-ss, check-theorem, ...).
std::string task_name(const TaskBlock& task);
/// Default task block for a subcommand name; throws for unknown names.
TaskBlock default_task(const std::string& name);

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
/// Missing fields take their defaults; unknown fields and bad values are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Canonical text: the json form with two-space indent and a trailing newline.
std::string save_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// SHA-256 (hex) of the canonical text without the output block.
std::string config_digest(const ExperimentConfig& config);

Engine make_engine(const ExperimentConfig& config);
DisorderAverager make_averager(const DisorderBlock& block, unsigned workers);
ObservableSpec make_observable(const ObservableEntry& entry);

struct CsvTable {
  std::string name;  // file name
  std::string text;
};

struct ExperimentReport {
  std::string task;
  nlohmann::ordered_json document;
  std::vector<CsvTable> tables;
  Verdict verdict = Verdict::kInconclusive;
};

/// Runs the task. `workers` only changes wall time, never the numbers.
ExperimentReport run_experiment(const ExperimentConfig& config, unsigned workers = 1);

/// Base document {task, config_digest, seeds, values, errors, margins_sigma, verdict} with
/// empty value lists and an INCONCLUSIVE verdict.
nlohmann::ordered_json empty_report(const ExperimentConfig& config);

/// Exit status for a verdict: 0 holds, 2 violated, 3 inconclusive.
int exit_code(Verdict verdict);

/// Writes <task>.json or the task's CSV tables into dir; returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& format);

}  // namespace rfon
