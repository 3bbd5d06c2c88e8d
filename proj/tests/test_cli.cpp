#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cvshrink/cli.hpp"
#include "cvshrink/csv.hpp"

using namespace cvshrink;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cvshrink_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_continuous_csv(const fs::path& dir) {
  Rng rng(4000, 0);
  std::string text = "x1,x2,x3,y\n";
  for (int i = 0; i < 40; ++i) {
    const double x1 = rng.normal(), x2 = rng.normal(), x3 = rng.normal();
    const double y = 1.0 + 0.8 * x1 - 0.4 * x3 + 0.5 * rng.normal();
    text += format_double(x1) + "," + format_double(x2) + "," + format_double(x3) + "," +
            format_double(y) + "\n";
  }
  const std::string path = (dir / "data.csv").string();
  atomic_write(path, text);
  return path;
}

std::string write_binary_csv(const fs::path& dir, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::string text = "x1,x2,y\n";
  for (int i = 0; i < 12; ++i) {
    const double x1 = rng.normal(), x2 = rng.normal();
    const int y = i < 2 ? 1 : 0;  // exactly two positives
    text += format_double(x1) + "," + format_double(x2) + "," + std::to_string(y) + "\n";
  }
  const std::string path = (dir / "binary.csv").string();
  atomic_write(path, text);
  return path;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(CVSHRINK_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cmd_evaluate: files written, reruns byte-identical") {
  const auto dir = fresh_dir("evaluate");
  const std::string csv = write_continuous_csv(dir);

  RunConfig cfg;
  cfg.input_path = csv;
  cfg.target_column = "y";
  cfg.n1 = 25;
  cfg.K = 5;
  cfg.gibbs_iterations = 400;
  cfg.gibbs_burn_in = 100;
  cfg.seed = 17;
  cfg.dump_chain = true;
  cfg.output_dir = (dir / "out_a").string();
  const PerformanceReport a = cmd_evaluate(cfg);
  CHECK(a.has_bayes);
  CHECK(a.alpha == 0.05);

  cfg.output_dir = (dir / "out_b").string();
  cmd_evaluate(cfg);

  CHECK(read_file((dir / "out_a" / "report.json").string()) ==
        read_file((dir / "out_b" / "report.json").string()));
  CHECK(read_file((dir / "out_a" / "chain.tsv").string()) ==
        read_file((dir / "out_b" / "chain.tsv").string()));

  const auto parsed = report_from_json(nlohmann::json::parse(read_file((dir / "out_a" / "report.json").string())));
  CHECK(parsed.naive == a.naive);
  CHECK(parsed.bayes == a.bayes);
}

TEST_CASE("cmd_evaluate: degenerate binary split surfaces the split index") {
  const auto dir = fresh_dir("evaluate_binary");
  RunConfig cfg;
  cfg.task = Task::binary;
  cfg.target_column = "y";
  cfg.n1 = 6;
  cfg.K = 0;
  cfg.gibbs_iterations = 200;
  cfg.gibbs_burn_in = 50;

  bool saw_degenerate = false;
  for (std::uint64_t seed = 0; seed < 100 && !saw_degenerate; ++seed) {
    cfg.input_path = write_binary_csv(dir, 4100);
    cfg.seed = seed;
    cfg.output_dir = (dir / "out").string();
    try {
      cmd_evaluate(cfg);
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.find("DegenerateTestSet") != std::string::npos) {
        CHECK(what.find("split 0") != std::string::npos);
        saw_degenerate = true;
      }
    }
  }
  CHECK(saw_degenerate);
}

TEST_CASE("cmd_simulate: tiny grid, byte-identical reruns") {
  const auto dir = fresh_dir("simulate");
  RunConfig cfg;
  cfg.n = 24;
  cfg.p = 4;
  cfg.K = 3;
  cfg.reps = 2;
  cfg.gibbs_iterations = 300;
  cfg.gibbs_burn_in = 60;
  cfg.seed = 5;
  cfg.grid = {6, 8};
  cfg.threads = 2;

  cfg.output_dir = (dir / "a").string();
  const auto summaries = cmd_simulate(cfg);
  CHECK(summaries.size() == 2);
  cfg.output_dir = (dir / "b").string();
  cmd_simulate(cfg);

  for (const std::string name : {"summary_n2_6.json", "summary_n2_8.json", "reps_n2_6.tsv",
                                 "reps_n2_8.tsv", "grid.tsv"}) {
    CHECK(read_file((dir / "a" / name).string()) == read_file((dir / "b" / name).string()));
  }
}

TEST_CASE("cmd_benchmark: synthetic surrogate end to end") {
  const auto dir = fresh_dir("benchmark");
  RunConfig cfg;
  cfg.synthetic = true;
  cfg.synthetic_rows = 700;
  cfg.working_n = 120;
  cfg.K = 4;
  cfg.reps = 2;
  cfg.gibbs_iterations = 300;
  cfg.gibbs_burn_in = 60;
  cfg.seed = 6;
  cfg.grid = {40, 60};
  cfg.output_dir = (dir / "out").string();
  const auto summaries = cmd_benchmark(cfg);
  CHECK(summaries.size() == 2);
  CHECK(summaries[0].has_baseline);
  CHECK(fs::exists(dir / "out" / "summary_n1_40.json"));
  CHECK(fs::exists(dir / "out" / "grid.tsv"));
  const std::string grid = read_file((dir / "out" / "grid.tsv").string());
  CHECK(grid.find("baseline_mspe") != std::string::npos);
}

TEST_CASE("cmd_report: merge, ordering, and schema guards") {
  const auto dir = fresh_dir("report");
  // Two study summaries at different n2, written out of order.
  SimConfig sim;
  sim.n = 24;
  sim.p = 4;
  sim.K = 2;
  sim.reps = 1;
  sim.gibbs.iterations = 200;
  sim.gibbs.burn_in = 50;
  sim.seed = RngState{8, 0};

  sim.n1 = 16;  // n2 = 8
  const StudySummary s8 = run_study(sim);
  sim.n1 = 18;  // n2 = 6
  const StudySummary s6 = run_study(sim);
  atomic_write((dir / "s8.json").string(), summary_to_json(s8).dump(2));
  atomic_write((dir / "s6.json").string(), summary_to_json(s6).dump(2));

  const std::string table =
      cmd_report({(dir / "s8.json").string(), (dir / "s6.json").string()}, (dir / "out").string());
  const std::string tsv = read_file((dir / "out" / "table.tsv").string());
  CHECK(tsv.find("\t6\t") < tsv.find("\t8\t"));  // sorted by n2
  CHECK(table.find("n1") != std::string::npos);

  nlohmann::json broken = summary_to_json(s6);
  broken["schema_version"] = 3;
  atomic_write((dir / "bad.json").string(), broken.dump());
  CHECK_THROWS_AS(cmd_report({(dir / "bad.json").string()}, (dir / "out").string()), Error);
}

TEST_CASE("merge_config_json: keys apply, unknown keys rejected") {
  RunConfig cfg;
  nlohmann::json j = {{"task", "binary"}, {"n1", 42},      {"lambda", 0.2}, {"M", 1234},
                      {"seed", 99},       {"grid", {5, 7}}, {"kappa0", 0.5}};
  merge_config_json(cfg, j);
  CHECK(cfg.task == Task::binary);
  CHECK(cfg.n1 == 42);
  CHECK(cfg.lambda == 0.2);
  CHECK(cfg.gibbs_iterations == 1234);
  CHECK(cfg.seed == 99);
  CHECK(cfg.grid == std::vector<int>{5, 7});
  CHECK(cfg.prior.kappa0 == 0.5);

  CHECK_THROWS_AS(merge_config_json(cfg, nlohmann::json{{"nope", 1}}), Error);
  CHECK_THROWS_AS(merge_config_json(cfg, nlohmann::json{{"n1", "not a number"}}), Error);
}

TEST_CASE("environment overrides the output directory") {
  RunConfig cfg;
  cfg.output_dir = "flag_value";
  setenv("CVSHRINK_OUTPUT_DIR", "/tmp/env_wins", 1);
  apply_env_overrides(cfg);
  CHECK(cfg.output_dir == "/tmp/env_wins");
  unsetenv("CVSHRINK_OUTPUT_DIR");
  cfg.output_dir = "flag_value";
  apply_env_overrides(cfg);
  CHECK(cfg.output_dir == "flag_value");
}

TEST_CASE("binary end to end: exit codes") {
  const auto dir = fresh_dir("binary_e2e");

  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("simulate --n 24 --p 4 --reps 1 --K 2 --M 200 --M0 50 --grid 6") == 2);  // no --seed
  CHECK(run_binary("evaluate --input /nonexistent.csv --target y --seed 1 --out " +
                   (dir / "x").string()) == 3);

  // Unknown key in the config file is a config error.
  atomic_write((dir / "bad.json").string(), "{\"frobnicate\": 1}\n");
  CHECK(run_binary("simulate --config " + (dir / "bad.json").string() + " --seed 1") == 2);

  // A complete tiny run: flags override the config file.
  atomic_write((dir / "cfg.json").string(),
               "{\"n\": 24, \"p\": 4, \"K\": 2, \"reps\": 1, \"M\": 200, \"M0\": 50,"
               " \"grid\": [6], \"threads\": 1}\n");
  const std::string out1 = (dir / "run1").string();
  const std::string out2 = (dir / "run2").string();
  const std::string out3 = (dir / "run3").string();
  CHECK(run_binary("simulate --config " + (dir / "cfg.json").string() + " --seed 1 --out " + out1) == 0);
  CHECK(run_binary("simulate --config " + (dir / "cfg.json").string() + " --seed 1 --out " + out2) == 0);
  CHECK(run_binary("simulate --config " + (dir / "cfg.json").string() + " --seed 2 --out " + out3) == 0);
  CHECK(read_file(out1 + "/grid.tsv") == read_file(out2 + "/grid.tsv"));
  CHECK(read_file(out1 + "/grid.tsv") != read_file(out3 + "/grid.tsv"));

  // report on the produced summary.
  CHECK(run_binary("report " + out1 + "/summary_n2_6.json --out " + (dir / "rep").string()) == 0);
  CHECK(fs::exists(dir / "rep" / "table.tsv"));
}
