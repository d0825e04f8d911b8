#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpp/averaging.hpp"
#include "dpp/experiment.hpp"

using namespace dpp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("builtin definitions match their canonical JSON byte for byte") {
  for (const auto& name : builtin_names()) {
    const auto p = builtin_problem(name);
    CHECK(validate(p).empty());
    CHECK(builtin_problem_json(name) == builtin_problem_json(name));
  }
  // Point sets of the simulation family.
  const auto p = builtin_problem("sim-linear");
  CHECK(p.states[0].points == std::vector<Vec>{{0, 0}});
  CHECK(p.states[1].points == std::vector<Vec>{{-5, 0}, {-5, 10}, {0, 0}, {0, 10}});
  CHECK(p.states[2].points == std::vector<Vec>{{0, -10}, {0, 0}, {5, -10}, {5, 0}});
  CHECK(p.states[0].prob == 0.1);
  CHECK(p.states[1].prob == 0.6);
  CHECK(p.states[2].prob == 0.3);
  // Constraint orientation: g(x) <= 0 with g1 = 1.5 - 2x1 - x2.
  Vec g;
  p.constraint_values({0.0, 0.0}, g);
  CHECK(g == Vec{1.5, 1.5});
  const auto n = builtin_problem("sim-linear-nonunique");
  n.constraint_values({0.0, 0.0}, g);
  CHECK(g == Vec{1.5, 1.5, 1.0});
}

TEST_CASE("cmd_run emits schema-valid artifacts that round trip") {
  TempDir dir("dpp_test_run");
  ExperimentSpec spec;
  spec.problem = "sim-linear";
  spec.V_list = {100.0};
  spec.horizon = 2000;
  spec.seeds = {1};
  spec.out_dir = dir.path.string();
  cmd_run(spec);

  const auto trace_path = dir.path / "trace_V100_seed1.csv";
  const auto frames_path = dir.path / "frames_V100_seed1.csv";
  REQUIRE(fs::exists(trace_path));
  REQUIRE(fs::exists(frames_path));

  const auto rows = read_trace_csv(trace_path.string(), 2, 2);
  CHECK(rows.size() == 2000);
  const auto header = slurp(trace_path).substr(0, 60);
  CHECK(header.rfind("t,omega,x_1,x_2,y_1,y_2,W_1,W_2,Z_1,Z_2,drift,bound_rhs", 0) == 0);
}

TEST_CASE("same spec produces identical artifact bytes") {
  TempDir a("dpp_test_det_a");
  TempDir b("dpp_test_det_b");
  ExperimentSpec spec;
  spec.problem = "sim-quadratic";
  spec.V_list = {50.0};
  spec.horizon = 1500;
  spec.seeds = {7};
  spec.out_dir = a.path.string();
  cmd_run(spec);
  spec.out_dir = b.path.string();
  cmd_run(spec);
  CHECK(slurp(a.path / "trace_V50_seed7.csv") == slurp(b.path / "trace_V50_seed7.csv"));
  CHECK(slurp(a.path / "frames_V50_seed7.csv") == slurp(b.path / "frames_V50_seed7.csv"));
}

TEST_CASE("long staggered run approaches the known optimum") {
  ExperimentSpec spec;
  spec.problem = "sim-linear";
  const auto p = load_problem(spec);
  RunConfig cfg;
  cfg.V = 200;
  cfg.horizon = 1 << 17;
  cfg.seed = 9;
  const auto frames = staggered_run(p, cfg, StaggerSchedule{2.0});
  const auto& last = frames.back();
  CHECK(std::abs(last.xbar[0] - 0.5) <= 0.05);
  CHECK(std::abs(last.xbar[1] - 0.5) <= 0.05);
  CHECK(std::abs(last.eval.f_xbar - 1.25) <= 0.05);

  const auto q = builtin_problem("sim-quadratic");
  const auto qframes = staggered_run(q, cfg, StaggerSchedule{2.0});
  CHECK(std::abs(qframes.back().eval.f_xbar - 0.5) <= 0.05);
}

TEST_CASE("cmd_dual reports the paper-scale optima") {
  ExperimentSpec spec;
  spec.problem = "sim-linear";
  const auto report = cmd_dual(spec);
  CHECK(report.find("\"f_opt\"") != std::string::npos);
  CHECK(report.find("\"unique_flag\": true") != std::string::npos);
  CHECK(report.find("\"kind\": \"polyhedral\"") != std::string::npos);

  spec.problem = "sim-linear-nonunique";
  const auto report2 = cmd_dual(spec);
  CHECK(report2.find("\"unique_flag\": false") != std::string::npos);
}

TEST_CASE("cmd_analyze requires its inputs and produces reports") {
  TempDir dir("dpp_test_analyze");
  ExperimentSpec spec;
  spec.problem = "sim-linear";
  spec.V_list = {100.0};
  spec.horizon = 5000;
  spec.seeds = {1};
  spec.out_dir = dir.path.string();

  CHECK_THROWS(cmd_analyze(spec));  // missing inputs

  cmd_run(spec);
  const auto dual_json = cmd_dual(spec);
  const auto dual_path = dir.path / "dual.json";
  {
    std::ofstream f(dual_path);
    f << dual_json;
  }
  spec.trace_file = (dir.path / "trace_V100_seed1.csv").string();
  spec.dual_report_file = dual_path.string();
  cmd_analyze(spec);
  CHECK(fs::exists(dir.path / "phase_report.json"));
  CHECK(fs::exists(dir.path / "convergence.csv"));
  const auto phase = slurp(dir.path / "phase_report.json");
  CHECK(phase.find("\"T_hat\"") != std::string::npos);
  CHECK(phase.find("\"regime\": \"polyhedral\"") != std::string::npos);
}

TEST_CASE("cmd_compare emits the mode comparison table") {
  TempDir dir("dpp_test_compare");
  ExperimentSpec spec;
  spec.problem = "sim-quadratic";
  spec.V_list = {50.0};
  spec.horizon = 20000;
  spec.seeds = {1, 2};
  spec.out_dir = dir.path.string();
  cmd_compare(spec);
  const auto csv = slurp(dir.path / "compare.csv");
  CHECK(csv.find("mode,V,t,obj_gap_mean") == 0);
  CHECK(csv.find("plain") != std::string::npos);
  CHECK(csv.find("staggered") != std::string::npos);
}

TEST_CASE("spec JSON parsing") {
  const auto s = spec_from_json(R"({
    "problem": "sim-quadratic",
    "V": [25, 50],
    "horizon": 1234,
    "seeds": [3, 4, 5],
    "mode": "plain",
    "stagger_base": 3.0,
    "out": "/tmp/x"
  })");
  CHECK(s.problem == "sim-quadratic");
  CHECK(s.V_list == std::vector<double>{25, 50});
  CHECK(s.horizon == 1234);
  CHECK(s.seeds.size() == 3);
  CHECK(s.mode == "plain");
  CHECK(s.stagger_base == 3.0);
  CHECK(s.out_dir == "/tmp/x");
}
