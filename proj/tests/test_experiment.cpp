#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfon/experiment.hpp"

using namespace rfon;

namespace {

ExperimentConfig theorem_config() {
  ExperimentConfig c;
  c.model.beta = 0.7;
  c.model.h = 1.0;
  c.disorder.n_samples = 300;
  c.disorder.base_seed = 7;
  CheckTheoremTask t;
  t.f = {ObservableEntry{"momentum", 1, 0}};
  c.task = t;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config round trip is byte identical") {
  for (const std::string name : {"check-ss", "check-theorem", "gamma-path", "lemma2", "largen", "saddle",
                                 "simulate"}) {
    ExperimentConfig c;
    c.task = default_task(name);
    c.model.beta = 0.123456789012345678;
    c.disorder.base_seed = 18446744073709551615ull;
    const auto text = save_config(c);
    const auto back = load_config(text);
    CHECK(save_config(back) == text);
    CHECK(task_name(back.task) == name);
    CHECK(back.model.beta == c.model.beta);
    CHECK(back.disorder.base_seed == c.disorder.base_seed);
  }
  SaddleTask s;
  s.planted_m2 = 0.5;
  ExperimentConfig c;
  c.task = s;
  CHECK(*std::get<SaddleTask>(load_config(save_config(c)).task).planted_m2 == 0.5);
  CHECK_THROWS(default_task("nope"));
}

TEST_CASE("digest follows the physics and ignores the output block") {
  auto c = theorem_config();
  const auto base = config_digest(c);
  CHECK(base.size() == 64);
  c.output.dir = "/elsewhere";
  c.output.format = "csv";
  CHECK(config_digest(c) == base);
  c.disorder.base_seed = 8;
  CHECK(config_digest(c) != base);
  c = theorem_config();
  c.sampler_seed = 1;
  CHECK(config_digest(c) != base);
}

TEST_CASE("malformed configs are rejected") {
  const auto good = nlohmann::json::parse(save_config(theorem_config()));
  auto extra = good;
  extra["model"]["temperature"] = 1.0;
  CHECK_THROWS(config_from_json(extra));
  auto top = good;
  top["comment"] = "x";
  CHECK_THROWS(config_from_json(top));
  auto measure = good;
  measure["model"]["measure"] = "cubic";
  CHECK_THROWS(config_from_json(measure));
  auto task = good;
  task["task"]["name"] = "unknown";
  CHECK_THROWS(config_from_json(task));
  CHECK_THROWS(load_config("{not json"));
  // missing fields take defaults
  const auto sparse = load_config(R"({"task": {"name": "largen"}})");
  CHECK(std::get<LargeNTask>(sparse.task).N == 10);
}

TEST_CASE("rejected inequality inputs surface as errors") {
  auto c = theorem_config();
  std::get<CheckTheoremTask>(c.task).l = 0;
  CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
  auto ss = theorem_config();
  ss.model.h = 0.0;
  ss.task = CheckSsTask{};
  CHECK_THROWS_AS(run_experiment(ss), std::invalid_argument);
}

TEST_CASE("large-N experiment") {
  ExperimentConfig c;
  c.task = LargeNTask{};
  const auto r = run_experiment(c);
  CHECK(r.verdict == Verdict::kHolds);
  CHECK(r.document["exponents"]["eta"].get<double>() == doctest::Approx(0.1));
  CHECK(r.document["verdict"] == "HOLDS");
  CHECK(r.document["config_digest"] == config_digest(c));
  CHECK(r.document["checks"][0]["name"] == "exponent_bound");
  LargeNTask broken;
  broken.N = 2;
  c.task = broken;
  CHECK(run_experiment(c).verdict == Verdict::kInconclusive);
}

TEST_CASE("saddle experiment") {
  ExperimentConfig c;
  SaddleTask s;
  s.planted_m2 = 0.5;
  c.task = s;
  const auto r = run_experiment(c);
  CHECK(r.verdict == Verdict::kHolds);
  s.planted_m2.reset();
  s.zero_mode = "exclude";
  s.beta = 1e3;
  c.task = s;
  const auto none = run_experiment(c);
  CHECK(none.document["details"]["status"] == "no_solution");
  CHECK(none.verdict == Verdict::kInconclusive);
}

TEST_CASE("empty report and exit codes") {
  const auto c = theorem_config();
  const auto doc = empty_report(c);
  CHECK(doc["task"] == "check-theorem");
  CHECK(doc["values"].empty());
  CHECK(doc["verdict"] == "INCONCLUSIVE");
  CHECK(doc["seeds"]["disorder_base_seed"] == 7);
  CHECK(exit_code(Verdict::kHolds) == 0);
  CHECK(exit_code(Verdict::kViolated) == 2);
  CHECK(exit_code(Verdict::kInconclusive) == 3);
}

TEST_CASE("reports are identical across worker counts and written as json or csv") {
  const auto c = theorem_config();
  const auto one = run_experiment(c, 1);
  const auto eight = run_experiment(c, 8);
  CHECK(one.document.dump(2) == eight.document.dump(2));
  CHECK(one.verdict != Verdict::kViolated);

  const auto dir = std::filesystem::temp_directory_path() / "rfon_experiment_test";
  std::filesystem::remove_all(dir);
  const auto json_paths = emit_report(one, dir / "json", "json");
  REQUIRE(json_paths.size() == 1);
  CHECK(json_paths[0].filename() == "check-theorem.json");
  CHECK(nlohmann::json::parse(slurp(json_paths[0]))["verdict"] == one.document["verdict"]);
  const auto csv_paths = emit_report(one, dir / "csv", "csv");
  CHECK(csv_paths.size() == one.tables.size());
  CHECK_THROWS(emit_report(one, dir, "xml"));

  ExperimentConfig g;
  g.model.beta = 0.5;
  g.model.h = 0.8;
  g.model.L = 3;
  g.disorder.n_samples = 40;
  GammaPathTask t;
  t.t_grid = {0.0, 0.5, 1.0};
  t.inner.n_samples = 8;
  g.task = t;
  const auto path = run_experiment(g);
  bool found = false;
  for (const auto& table : path.tables)
    if (table.name == "gamma_path.csv") {
      found = true;
      CHECK(table.text.rfind("t,gamma,stderr,dgamma_lemma1,stderr\n", 0) == 0);
    }
  CHECK(found);
  std::filesystem::remove_all(dir);
}
