#include "dpp/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dpp/averaging.hpp"
#include "dpp/dual.hpp"
#include "dpp/engine.hpp"

namespace dpp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json point_list(std::initializer_list<std::initializer_list<double>> pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(Vec(p));
  return arr;
}

json base_instance(bool quadratic, bool nonunique) {
  json j;
  // Random states and their finite decision sets: one idle state and two
  // states offering binary choices per coordinate.
  j["states"] = json::array();
  j["states"].push_back({{"id", 0}, {"prob", 0.1}, {"points", point_list({{0, 0}})}});
  j["states"].push_back({{"id", 1},
                         {"prob", 0.6},
                         {"points", point_list({{-5, 0}, {-5, 10}, {0, 0}, {0, 10}})}});
  j["states"].push_back({{"id", 2},
                         {"prob", 0.3},
                         {"points", point_list({{0, -10}, {0, 0}, {5, -10}, {5, 0}})}});
  if (quadratic) {
    j["objective"] = {{"kind", "separable_quadratic"}, {"q", {1.0, 1.0}}, {"c", {0.0, 0.0}}, {"b", 0.0}};
  } else {
    j["objective"] = {{"kind", "affine"}, {"a", {1.5, 1.0}}, {"b", 0.0}};
  }
  // Averages must satisfy 2 x1 + x2 >= 1.5 and x1 + 2 x2 >= 1.5, written in
  // the canonical g(x) <= 0 orientation.
  j["constraints"] = json::array();
  j["constraints"].push_back({{"kind", "affine"}, {"a", {-2.0, -1.0}}, {"b", 1.5}});
  j["constraints"].push_back({{"kind", "affine"}, {"a", {-1.0, -2.0}}, {"b", 1.5}});
  if (nonunique) {
    j["constraints"].push_back({{"kind", "affine"}, {"a", {-1.0, -1.0}}, {"b", 1.0}});
  }
  j["extended_set"] = {{"lower", {-5.0, -10.0}}, {"upper", {5.0, 10.0}}};
  return j;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"sim-linear", "sim-quadratic", "sim-linear-nonunique", "sim-quadratic-nonunique"};
}

std::string builtin_problem_json(const std::string& name) {
  if (name == "sim-linear") return base_instance(false, false).dump(2);
  if (name == "sim-quadratic") return base_instance(true, false).dump(2);
  if (name == "sim-linear-nonunique") return base_instance(false, true).dump(2);
  if (name == "sim-quadratic-nonunique") return base_instance(true, true).dump(2);
  throw std::invalid_argument("unknown builtin problem: " + name);
}

StochasticProblem builtin_problem(const std::string& name) {
  return problem_from_json(builtin_problem_json(name));
}

ExperimentSpec spec_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  ExperimentSpec s;
  s.problem = j.value("problem", std::string("sim-linear"));
  if (j.contains("V")) {
    if (j["V"].is_array()) {
      s.V_list = j["V"].get<std::vector<double>>();
    } else {
      s.V_list = {j["V"].get<double>()};
    }
  }
  s.horizon = j.value("horizon", s.horizon);
  if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  s.mode = j.value("mode", s.mode);
  s.stagger_base = j.value("stagger_base", s.stagger_base);
  s.initial_queue_per_V = j.value("initial_queue_per_V", s.initial_queue_per_V);
  s.out_dir = j.value("out", s.out_dir);
  s.trace_every = j.value("trace_every", s.trace_every);
  s.dual_starts = j.value("dual_starts", s.dual_starts);
  s.dual_seed = j.value("dual_seed", s.dual_seed);
  s.dual_tol = j.value("dual_tol", s.dual_tol);
  s.trace_file = j.value("trace", std::string());
  s.dual_report_file = j.value("dual_report", std::string());
  return s;
}

StochasticProblem load_problem(const ExperimentSpec& spec) {
  for (const auto& n : builtin_names()) {
    if (spec.problem == n) return builtin_problem(n);
  }
  return problem_from_file(spec.problem);
}

namespace {

std::string cell_tag(double V, std::uint64_t seed) {
  std::ostringstream os;
  os << "V" << V << "_seed" << seed;
  return os.str();
}

RunConfig cell_config(const ExperimentSpec& spec, const StochasticProblem& p, double V,
                      std::uint64_t seed) {
  RunConfig cfg;
  cfg.V = V;
  cfg.horizon = spec.horizon;
  cfg.seed = seed;
  cfg.initial_W.assign(p.constraint_dim(), spec.initial_queue_per_V * V);
  cfg.initial_Z.assign(p.decision_dim(), spec.initial_queue_per_V * V);
  cfg.granularity = spec.trace_every > 1 ? TraceGranularity::EveryK : TraceGranularity::Full;
  cfg.every_k = spec.trace_every;
  return cfg;
}

void run_one_cell(const ExperimentSpec& spec, const StochasticProblem& p, double V,
                  std::uint64_t seed) {
  const RunConfig cfg = cell_config(spec, p, V, seed);
  Engine engine(p, cfg);
  const Trace trace = engine.run();
  const fs::path dir(spec.out_dir);
  write_trace_csv(trace, (dir / ("trace_" + cell_tag(V, seed) + ".csv")).string());

  std::vector<FrameSummary> frames;
  if (spec.mode == "plain") {
    frames = staggered_run(p, cfg, std::vector<std::int64_t>{});
  } else {
    frames = staggered_run(p, cfg, StaggerSchedule{spec.stagger_base});
  }
  write_frames_csv(frames, p.constraint_dim(),
                   (dir / ("frames_" + cell_tag(V, seed) + ".csv")).string());
}

}  // namespace

void cmd_run(const ExperimentSpec& spec) {
  const StochasticProblem p = load_problem(spec);
  const auto violations = validate(p);
  if (!violations.empty()) {
    std::string msg = "invalid problem:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }
  fs::create_directories(spec.out_dir);
  std::vector<std::future<void>> futs;
  for (double V : spec.V_list) {
    for (std::uint64_t seed : spec.seeds) {
      futs.push_back(std::async(std::launch::async,
                                [&, V, seed]() { run_one_cell(spec, p, V, seed); }));
    }
  }
  for (auto& f : futs) f.get();
}

std::string cmd_dual(const ExperimentSpec& spec) {
  const StochasticProblem p = load_problem(spec);
  DualSolveOptions opts;
  opts.starts = spec.dual_starts;
  opts.seed = spec.dual_seed;
  opts.uniqueness_tol = spec.dual_tol;
  return dual_report_json(p, opts);
}

std::string dual_report_json(const StochasticProblem& p, const DualSolveOptions& opts) {
  const DualSolution sol = solve_dual(p, opts);
  const GeometryEstimate geo = probe_geometry(p, sol);

  json j;
  j["lambda_star"] = {{"w", sol.lambda_star.w}, {"z", sol.lambda_star.z}};
  j["d_star"] = sol.d_star;
  j["f_opt"] = sol.f_opt;
  j["primal_estimate"] = sol.primal_estimate;
  j["multi_start_spread"] = sol.multi_start_spread;
  j["unique_flag"] = sol.unique_flag;
  j["converged"] = sol.converged;
  j["geometry"] = {{"kind", geometry_kind_name(geo.kind)},
                   {"L_P", geo.L_P},
                   {"L_G", geo.L_G},
                   {"L_G_prime", geo.L_G_prime},
                   {"S", geo.S},
                   {"sample_count", geo.sample_count}};
  j["C"] = compute_C(p);
  return j.dump(2);
}

void cmd_analyze(const ExperimentSpec& spec) {
  const StochasticProblem p = load_problem(spec);
  if (spec.trace_file.empty() || spec.dual_report_file.empty()) {
    throw std::invalid_argument("analyze needs --trace and --dual-report");
  }
  std::ifstream in(spec.dual_report_file);
  if (!in) throw std::runtime_error("cannot open dual report: " + spec.dual_report_file);
  json dj = json::parse(in);

  DualPoint lam;
  lam.w = dj["lambda_star"]["w"].get<Vec>();
  lam.z = dj["lambda_star"]["z"].get<Vec>();
  GeometryEstimate geo;
  const std::string kind = dj["geometry"]["kind"].get<std::string>();
  geo.kind = kind == "polyhedral"       ? GeometryEstimate::Kind::Polyhedral
             : kind == "non-polyhedral" ? GeometryEstimate::Kind::NonPolyhedral
                                        : GeometryEstimate::Kind::Undetermined;
  geo.L_P = dj["geometry"]["L_P"].get<double>();
  geo.L_G = dj["geometry"]["L_G"].get<double>();
  geo.L_G_prime = dj["geometry"]["L_G_prime"].get<double>();
  geo.S = dj["geometry"]["S"].get<double>();
  const double C = dj.value("C", compute_C(p));
  const double f_opt = dj["f_opt"].get<double>();

  const double V = spec.V_list.at(0);
  const PhaseConstants pc = phase_constants(C, V, geo);

  const auto rows = read_trace_csv(spec.trace_file, p.decision_dim(), p.constraint_dim());
  if (rows.empty()) throw std::runtime_error("empty trace");
  std::vector<double> K;
  K.reserve(rows.size() + 1);
  auto dist_q = [&](const Vec& W, const Vec& Z) {
    double s = 0.0;
    for (std::size_t j = 0; j < lam.w.size(); ++j) {
      const double d = W[j] - V * lam.w[j];
      s += d * d;
    }
    for (std::size_t i = 0; i < lam.z.size(); ++i) {
      const double d = Z[i] - V * lam.z[i];
      s += d * d;
    }
    return std::sqrt(s);
  };
  K.push_back(dist_q(rows[0].W, rows[0].Z));
  Vec Wn, Zn;
  for (const auto& r : rows) K.push_back(dist_q(r.W, r.Z));

  const TransientResult tr = transient_time(K, pc.B);
  ConcentrationReport rep;
  bool have_rep = false;
  if (tr.reached && tr.T_hat + 1 < static_cast<std::int64_t>(K.size())) {
    rep = concentration_check({&K}, pc, tr.T_hat);
    have_rep = true;
  }

  double mean_K = 0, max_K = 0, mean_K2 = 0;
  for (double k : K) {
    mean_K += k;
    mean_K2 += k * k;
    max_K = std::max(max_K, k);
  }
  mean_K /= K.size();
  mean_K2 /= K.size();

  json out;
  out["V"] = V;
  out["regime"] = geometry_kind_name(pc.regime);
  out["constants"] = {{"C", pc.C},       {"delta", pc.delta}, {"beta", pc.beta},
                      {"B", pc.B},       {"B_prime", pc.B_prime}, {"r", pc.r},
                      {"rho", pc.rho},   {"D", pc.D},         {"U", pc.U},
                      {"U_prime", pc.U_prime}, {"preconditions_ok", pc.preconditions_ok}};
  out["transient"] = {{"T_hat", tr.T_hat}, {"reached", tr.reached}, {"k0", tr.k0}};
  out["K_stats"] = {{"mean", mean_K}, {"max", max_K}, {"mean_sq", mean_K2}};
  if (have_rep) {
    json tails = json::array();
    for (const auto& tc : rep.tails) {
      tails.push_back(
          {{"m", tc.m}, {"empirical", tc.empirical}, {"bound", tc.bound}, {"ok", tc.ok}});
    }
    out["concentration"] = {{"empirical_mgf", rep.empirical_mgf},
                            {"mgf_bound", rep.mgf_bound},
                            {"mgf_ok", rep.mgf_ok},
                            {"tails", tails},
                            {"max_increment", rep.max_increment},
                            {"increment_bound", rep.increment_bound},
                            {"increments_ok", rep.increments_ok}};
  }

  fs::create_directories(spec.out_dir);
  const fs::path dir(spec.out_dir);
  {
    std::ofstream f(dir / "phase_report.json", std::ios::binary);
    f << out.dump(2) << "\n";
  }

  // Convergence table across the requested grid, replication means.
  std::vector<CheckpointSeries> series;
  for (double Vi : spec.V_list) {
    for (std::uint64_t seed : spec.seeds) {
      MeasureOptions mo;
      mo.V = Vi;
      mo.seed = seed;
      mo.horizon = spec.horizon;
      mo.mode = spec.mode == "plain"          ? AveragingMode::FromZero
                : spec.mode == "oracle-start" ? AveragingMode::OracleStart
                                              : AveragingMode::Staggered;
      mo.initial_queue_per_V = spec.initial_queue_per_V;
      mo.stagger_base = spec.stagger_base;
      mo.f_opt = f_opt;
      mo.lambda_star = lam;
      mo.transient_ball = pc.B;
      series.push_back(measure_run(p, mo));
    }
  }
  {
    std::ofstream f(dir / "convergence.csv", std::ios::binary);
    f << curve_to_csv(aggregate_series(series));
  }
}

void cmd_compare(const ExperimentSpec& spec) {
  const StochasticProblem p = load_problem(spec);
  double f_opt;
  {
    DualSolveOptions opts;
    opts.starts = spec.dual_starts;
    opts.seed = spec.dual_seed;
    f_opt = solve_dual(p, opts).f_opt;
  }
  std::vector<CheckpointSeries> series;
  std::vector<std::future<CheckpointSeries>> futs;
  for (double V : spec.V_list) {
    for (std::uint64_t seed : spec.seeds) {
      for (AveragingMode mode : {AveragingMode::FromZero, AveragingMode::Staggered}) {
        futs.push_back(std::async(std::launch::async, [&, V, seed, mode]() {
          MeasureOptions mo;
          mo.V = V;
          mo.seed = seed;
          mo.horizon = spec.horizon;
          mo.mode = mode;
          mo.initial_queue_per_V = spec.initial_queue_per_V;
          mo.stagger_base = spec.stagger_base;
          mo.f_opt = f_opt;
          return measure_run(p, mo);
        }));
      }
    }
  }
  for (auto& f : futs) series.push_back(f.get());
  fs::create_directories(spec.out_dir);
  std::ofstream f(fs::path(spec.out_dir) / "compare.csv", std::ios::binary);
  f << curve_to_csv(aggregate_series(series));
}

void cmd_sweep(const ExperimentSpec& spec) {
  cmd_run(spec);
  const StochasticProblem p = load_problem(spec);
  // Combined summary: final frame of every cell.
  std::string out = "V,seed,t0,T,f_xbar,max_g_xbar\n";
  char buf[128];
  for (double V : spec.V_list) {
    for (std::uint64_t seed : spec.seeds) {
      const RunConfig cfg = cell_config(spec, p, V, seed);
      const auto frames = staggered_run(p, cfg, StaggerSchedule{spec.stagger_base});
      if (frames.empty()) continue;
      const auto& last = frames.back();
      double mg = -1e300;
      for (double g : last.eval.g_xbar) mg = std::max(mg, g);
      if (last.eval.g_xbar.empty()) mg = 0.0;
      std::snprintf(buf, sizeof(buf), "%.17g,%llu,%lld,%lld,%.17g,%.17g\n", V,
                    static_cast<unsigned long long>(seed), static_cast<long long>(last.t0),
                    static_cast<long long>(last.T), last.eval.f_xbar, mg);
      out += buf;
    }
  }
  std::ofstream f(fs::path(spec.out_dir) / "sweep_summary.csv", std::ios::binary);
  f << out;
}

}  // namespace dpp
