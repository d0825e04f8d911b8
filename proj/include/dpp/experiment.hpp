#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpp/phase.hpp"
#include "dpp/problem.hpp"

namespace dpp {

/// Canonical JSON of a builtin instance; throws on unknown names.
/// Builtins: sim-linear, sim-quadratic, sim-linear-nonunique,
/// sim-quadratic-nonunique.
std::string builtin_problem_json(const std::string& name);
StochasticProblem builtin_problem(const std::string& name);
std::vector<std::string> builtin_names();

struct ExperimentSpec {
  std::string problem;  // builtin name or path to a JSON file
  std::vector<double> V_list = {100.0};
  std::int64_t horizon = 100000;
  std::vector<std::uint64_t> seeds = {1};
  std::string mode = "staggered";  // plain | staggered | oracle-start
  double stagger_base = 2.0;
  double initial_queue_per_V = 0.0;
  std::string out_dir = ".";
  std::int64_t trace_every = 1;
  int dual_starts = 16;
  std::uint64_t dual_seed = 1;
  double dual_tol = 1e-3;
  // analyze/compare inputs
  std::string trace_file;
  std::string dual_report_file;
};

ExperimentSpec spec_from_json(const std::string& json_text);

StochasticProblem load_problem(const ExperimentSpec& spec);

/// run: one trace CSV + frame-summary CSV per (V, seed) cell, concurrently.
void cmd_run(const ExperimentSpec& spec);

/// dual: solve the embedded dual, probe geometry, return the JSON report.
std::string cmd_dual(const ExperimentSpec& spec);

/// Report body shared by cmd_dual and the C API.
std::string dual_report_json(const StochasticProblem& p, const DualSolveOptions& opts);

/// analyze: phase report (JSON) + convergence table (CSV) from a trace CSV
/// and a dual report.
void cmd_analyze(const ExperimentSpec& spec);

/// compare: staggered vs plain error-over-time curves, averaged over seeds.
void cmd_compare(const ExperimentSpec& spec);

/// sweep: runs + frame summaries over the whole (V, seed) grid plus a
/// combined summary CSV.
void cmd_sweep(const ExperimentSpec& spec);

}  // namespace dpp
