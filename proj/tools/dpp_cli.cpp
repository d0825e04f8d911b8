// Command-line front end. Talks to the shared library strictly through the
// C API; flags are assembled into the JSON spec the library consumes.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpp/capi.h"

using nlohmann::json;

namespace {

struct CommonFlags {
  std::string problem = "sim-linear";
  std::vector<double> V = {100.0};
  long long horizon = 100000;
  std::vector<unsigned long long> seeds = {1};
  std::string mode = "staggered";
  double stagger_base = 2.0;
  double initial_queue_per_V = 0.0;
  std::string out;
  long long trace_every = 1;
  int dual_starts = 16;
  unsigned long long dual_seed = 1;
  double dual_tol = 1e-3;
  std::string trace;
  std::string dual_report;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--problem", f.problem,
                  "builtin name (" + std::string(dpp_builtin_names()) + ") or JSON file");
  cmd->add_option("--V", f.V, "penalty parameter(s)");
  cmd->add_option("--horizon", f.horizon, "number of slots");
  cmd->add_option("--seed,--seeds", f.seeds, "replication seeds");
  cmd->add_option("--mode", f.mode, "plain|staggered|oracle-start");
  cmd->add_option("--stagger-base", f.stagger_base, "geometric restart base");
  cmd->add_option("--initial-queue-per-V", f.initial_queue_per_V,
                  "Q(0) = V * this, componentwise");
  cmd->add_option("--out", f.out, "output directory (default $DPP_OUT_DIR or .)");
  cmd->add_option("--trace-every", f.trace_every, "store every k-th slot in trace CSVs");
  cmd->add_option("--dual-starts", f.dual_starts, "multi-start count for the dual solver");
  cmd->add_option("--dual-seed", f.dual_seed, "dual solver seed");
  cmd->add_option("--dual-tol", f.dual_tol, "multiplier uniqueness tolerance");
}

std::string spec_json(const CommonFlags& f) {
  json j;
  j["problem"] = f.problem;
  j["V"] = f.V;
  j["horizon"] = f.horizon;
  j["seeds"] = f.seeds;
  j["mode"] = f.mode;
  j["stagger_base"] = f.stagger_base;
  j["initial_queue_per_V"] = f.initial_queue_per_V;
  std::string out = f.out;
  if (out.empty()) {
    const char* env = std::getenv("DPP_OUT_DIR");
    out = env ? env : ".";
  }
  j["out"] = out;
  j["trace_every"] = f.trace_every;
  j["dual_starts"] = f.dual_starts;
  j["dual_seed"] = f.dual_seed;
  j["dual_tol"] = f.dual_tol;
  if (!f.trace.empty()) j["trace"] = f.trace;
  if (!f.dual_report.empty()) j["dual_report"] = f.dual_report;
  return j.dump();
}

int fail(int status) {
  std::fprintf(stderr, "error: %s\n", dpp_last_error());
  return status == DPP_OK ? 1 : status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-plus-penalty simulator and convergence analyzer"};
  app.require_subcommand(1);

  CommonFlags f;

  auto* c_run = app.add_subcommand("run", "simulate and emit trace + frame CSVs");
  add_common(c_run, f);
  auto* c_dual = app.add_subcommand("dual", "solve the embedded dual, print a JSON report");
  add_common(c_dual, f);
  auto* c_analyze =
      app.add_subcommand("analyze", "phase report + convergence table from a trace");
  add_common(c_analyze, f);
  c_analyze->add_option("--trace", f.trace, "trace CSV produced by run")->required();
  c_analyze->add_option("--dual-report", f.dual_report, "JSON report produced by dual")
      ->required();
  auto* c_compare =
      app.add_subcommand("compare", "staggered vs plain averaging error curves");
  add_common(c_compare, f);
  auto* c_sweep = app.add_subcommand("sweep", "run the full (V, seed) grid with summaries");
  add_common(c_sweep, f);

  CLI11_PARSE(app, argc, argv);

  const std::string spec = spec_json(f);
  int rc = DPP_OK;
  if (c_run->parsed()) {
    rc = dpp_cmd_run(spec.c_str());
    if (rc != DPP_OK) return fail(rc);
  } else if (c_dual->parsed()) {
    char* report = nullptr;
    rc = dpp_cmd_dual(spec.c_str(), &report);
    if (rc != DPP_OK) return fail(rc);
    std::printf("%s\n", report);
    dpp_string_free(report);
  } else if (c_analyze->parsed()) {
    rc = dpp_cmd_analyze(spec.c_str());
    if (rc != DPP_OK) return fail(rc);
  } else if (c_compare->parsed()) {
    rc = dpp_cmd_compare(spec.c_str());
    if (rc != DPP_OK) return fail(rc);
  } else if (c_sweep->parsed()) {
    rc = dpp_cmd_sweep(spec.c_str());
    if (rc != DPP_OK) return fail(rc);
  }
  return 0;
}
