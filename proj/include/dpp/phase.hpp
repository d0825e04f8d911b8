#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpp/dual.hpp"
#include "dpp/engine.hpp"
#include "dpp/problem.hpp"

namespace dpp {

/// Constants of the drift/concentration analysis, instantiated for the
/// detected dual geometry. Exponential-bound parameters follow the generic
/// rule r = beta/(delta^2 + delta*beta/3), rho = 1 - r*beta/2,
/// D = (e^{r delta} - rho) e^{r K} / (1 - rho) with delta = sqrt(2C) and
/// (beta, K) = (L_P/2, B_P) or (1/sqrt(V), B_G(V)) per regime.
struct PhaseConstants {
  GeometryEstimate::Kind regime = GeometryEstimate::Kind::Undetermined;
  double C = 0.0;
  double V = 0.0;
  double delta = 0.0;  // sqrt(2C), max queue movement per slot
  double beta = 0.0;   // negative-drift magnitude (capped at delta)
  double B = 0.0;      // concentration ball radius: B_P or B_G(V)
  double B_prime = 0.0;  // B_G' (non-polyhedral far-field), 0 otherwise
  double r = 0.0;
  double rho = 0.0;
  double D = 0.0;
  double U = 0.0;        // steady-state bound on E||Q - V lambda*||
  double U_prime = 0.0;  // ... and on the squared distance
  bool preconditions_ok = true;  // B_G(V) < SV, B_G' <= SV, sqrt(V) >= 2/L_G'
};

PhaseConstants phase_constants(double C, double V, const GeometryEstimate& geometry);

/// ||Q(t) - V lambda*|| for t = 0..horizon (length horizon+1).
std::vector<double> distance_series(const StochasticProblem& p, const RunConfig& cfg,
                                    const DualPoint& lambda_star);

struct TransientResult {
  std::int64_t T_hat = 0;
  bool reached = false;
  double k0 = 0.0;  // K(T_hat) when reached
};

/// First slot with K(t) < B; horizon with reached=false when never.
TransientResult transient_time(const std::vector<double>& K, double B);

struct TailCheck {
  double m = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  bool ok = false;
};

struct ConcentrationReport {
  double r = 0.0;
  double k0 = 0.0;
  double empirical_mgf = 0.0;  // mean of e^{r K(t)} over the steady segment
  double mgf_bound = 0.0;      // D + e^{r k0}
  bool mgf_ok = false;
  std::vector<TailCheck> tails;
  double max_increment = 0.0;  // max |K(t+1)-K(t)|
  double increment_bound = 0.0;
  bool increments_ok = false;
  std::int64_t steady_slots = 0;
};

/// Verifies the exponential moment and tail bounds on the steady segment
/// [T_hat, end] of one or more pooled distance series. Margins widen the
/// theoretical bounds to absorb sampling error.
ConcentrationReport concentration_check(const std::vector<const std::vector<double>*>& series,
                                        const PhaseConstants& constants, std::int64_t T_hat,
                                        double mgf_margin = 1.1, double tail_margin = 1.5);

// --- Convergence measurement -------------------------------------------------

enum class AveragingMode { FromZero, Staggered, OracleStart };

std::string averaging_mode_name(AveragingMode m);

struct MeasureOptions {
  double V = 100.0;
  std::uint64_t seed = 1;
  std::int64_t horizon = 100000;
  AveragingMode mode = AveragingMode::FromZero;
  double initial_queue_per_V = 0.0;  // Q(0) = V * this (componentwise)
  double stagger_base = 2.0;
  double f_opt = 0.0;
  std::optional<DualPoint> lambda_star;  // required for oracle-start
  double transient_ball = 0.0;           // ... and the ball radius B
  double checkpoint_growth = 1.2;
};

struct CheckpointSeries {
  double V = 0.0;
  std::uint64_t seed = 0;
  AveragingMode mode = AveragingMode::FromZero;
  std::vector<std::int64_t> t;  // total elapsed slots at evaluation
  std::vector<double> obj_gap;  // f(average) - f_opt, signed
  std::vector<double> viol;     // max_j g_j(average)
  std::int64_t T_hat = 0;       // oracle-start only
};

/// One run of the engine with the requested averaging discipline, evaluated
/// at geometric checkpoints (frame ends for staggered averaging).
CheckpointSeries measure_run(const StochasticProblem& p, const MeasureOptions& opts);

/// Earliest checkpoint from which both obj_gap <= eps and viol <= eps hold at
/// every later checkpoint; nullopt when never stable within the horizon.
std::optional<std::int64_t> slots_to_eps(const CheckpointSeries& s, double eps);

struct LogLogFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct CurveRow {
  AveragingMode mode;
  double V = 0.0;
  std::int64_t t = 0;
  double obj_gap_mean = 0.0;
  double obj_gap_se = 0.0;
  double viol_mean = 0.0;
  double viol_se = 0.0;
  int replications = 0;
};

/// Across-seed aggregation on the common checkpoint grid (series must come
/// from identical options except the seed).
std::vector<CurveRow> aggregate_series(const std::vector<CheckpointSeries>& runs);

std::string curve_to_csv(const std::vector<CurveRow>& rows);

}  // namespace dpp
