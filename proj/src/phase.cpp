#include "dpp/phase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "dpp/averaging.hpp"

namespace dpp {

PhaseConstants phase_constants(double C, double V, const GeometryEstimate& geometry) {
  if (geometry.kind == GeometryEstimate::Kind::Undetermined) {
    throw std::invalid_argument("geometry required");
  }
  PhaseConstants pc;
  pc.regime = geometry.kind;
  pc.C = C;
  pc.V = V;
  pc.delta = std::sqrt(2.0 * C);

  if (geometry.kind == GeometryEstimate::Kind::Polyhedral) {
    const double L = geometry.L_P;
    pc.B = std::max(L / 2.0, 2.0 * C / L);
    pc.beta = std::min(L / 2.0, pc.delta);
  } else {
    const double LG = geometry.L_G;
    const double LGp = geometry.L_G_prime;
    pc.B = std::max(1.0 / std::sqrt(V),
                    std::sqrt(V) * (1.0 + std::sqrt(1.0 + 4.0 * LG * C)) / (2.0 * LG));
    pc.B_prime = std::max(LGp / 2.0, 2.0 * C / LGp);
    pc.beta = std::min(1.0 / std::sqrt(V), pc.delta);
    const double SV = geometry.S * V;
    pc.preconditions_ok = (pc.B < SV) && (pc.B_prime <= SV) && (std::sqrt(V) >= 2.0 / LGp);
  }

  pc.r = pc.beta / (pc.delta * pc.delta + pc.delta * pc.beta / 3.0);
  pc.rho = 1.0 - pc.r * pc.beta / 2.0;
  pc.D = (std::exp(pc.r * pc.delta) - pc.rho) * std::exp(pc.r * pc.B) / (1.0 - pc.rho);
  const double core = pc.D + std::exp(pc.r * pc.B);
  pc.U = std::log(core) / pc.r;
  pc.U_prime = 2.0 * core / (pc.r * pc.r);
  return pc;
}

std::vector<double> distance_series(const StochasticProblem& p, const RunConfig& cfg,
                                    const DualPoint& lambda_star) {
  const int J = p.constraint_dim();
  const int I = p.decision_dim();
  std::vector<double> K;
  K.reserve(cfg.horizon + 1);
  auto dist_q = [&](const Vec& W, const Vec& Z) {
    double s = 0.0;
    for (int j = 0; j < J; ++j) {
      const double d = W[j] - cfg.V * lambda_star.w[j];
      s += d * d;
    }
    for (int i = 0; i < I; ++i) {
      const double d = Z[i] - cfg.V * lambda_star.z[i];
      s += d * d;
    }
    return std::sqrt(s);
  };
  Engine engine(p, cfg);
  K.push_back(dist_q(engine.state().W, engine.state().Z));
  engine.run_streamed([&](const SlotRecord& rec) { K.push_back(dist_q(rec.W_next, rec.Z_next)); });
  return K;
}

TransientResult transient_time(const std::vector<double>& K, double B) {
  TransientResult r;
  for (std::size_t t = 0; t < K.size(); ++t) {
    if (K[t] < B) {
      r.T_hat = static_cast<std::int64_t>(t);
      r.reached = true;
      r.k0 = K[t];
      return r;
    }
  }
  r.T_hat = static_cast<std::int64_t>(K.size()) - 1;
  r.reached = false;
  r.k0 = K.empty() ? 0.0 : K.back();
  return r;
}

ConcentrationReport concentration_check(const std::vector<const std::vector<double>*>& series,
                                        const PhaseConstants& constants, std::int64_t T_hat,
                                        double mgf_margin, double tail_margin) {
  ConcentrationReport rep;
  rep.r = constants.r;
  rep.increment_bound = constants.delta + 1e-9;

  double k0 = 0.0;
  double mgf_sum = 0.0;
  std::int64_t n = 0;
  double max_inc = 0.0;
  const std::vector<double> ms = {constants.B, 2.0 * constants.B, 4.0 * constants.B};
  std::vector<std::int64_t> tail_counts(ms.size(), 0);

  for (const auto* Kp : series) {
    const auto& K = *Kp;
    if (static_cast<std::int64_t>(K.size()) <= T_hat) continue;
    k0 = std::max(k0, K[T_hat]);
    for (std::size_t t = T_hat; t < K.size(); ++t) {
      mgf_sum += std::exp(constants.r * K[t]);
      for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        if (K[t] >= ms[mi]) ++tail_counts[mi];
      }
      ++n;
    }
    for (std::size_t t = 1; t < K.size(); ++t) {
      max_inc = std::max(max_inc, std::abs(K[t] - K[t - 1]));
    }
  }
  if (n == 0) throw std::invalid_argument("empty steady-state segment");

  rep.k0 = k0;
  rep.steady_slots = n;
  rep.empirical_mgf = mgf_sum / static_cast<double>(n);
  rep.mgf_bound = constants.D + std::exp(constants.r * k0);
  rep.mgf_ok = rep.empirical_mgf <= mgf_margin * rep.mgf_bound;
  for (std::size_t mi = 0; mi < ms.size(); ++mi) {
    TailCheck tc;
    tc.m = ms[mi];
    tc.empirical = static_cast<double>(tail_counts[mi]) / static_cast<double>(n);
    tc.bound = rep.mgf_bound * std::exp(-constants.r * ms[mi]);
    tc.ok = tc.empirical <= tail_margin * tc.bound;
    rep.tails.push_back(tc);
  }
  rep.max_increment = max_inc;
  rep.increments_ok = max_inc <= rep.increment_bound;
  return rep;
}

// --- Convergence measurement -------------------------------------------------

std::string averaging_mode_name(AveragingMode m) {
  switch (m) {
    case AveragingMode::FromZero:
      return "plain";
    case AveragingMode::Staggered:
      return "staggered";
    case AveragingMode::OracleStart:
      return "oracle-start";
  }
  return "?";
}

CheckpointSeries measure_run(const StochasticProblem& p, const MeasureOptions& opts) {
  const int I = p.decision_dim();
  const int J = p.constraint_dim();

  RunConfig cfg;
  cfg.V = opts.V;
  cfg.horizon = opts.horizon;
  cfg.seed = opts.seed;
  cfg.initial_W.assign(J, opts.initial_queue_per_V * opts.V);
  cfg.initial_Z.assign(I, opts.initial_queue_per_V * opts.V);

  CheckpointSeries out;
  out.V = opts.V;
  out.seed = opts.seed;
  out.mode = opts.mode;

  AverageWindow window(I, 0);
  bool averaging = opts.mode != AveragingMode::OracleStart;

  std::vector<std::int64_t> restarts;
  std::size_t next_restart = 0;
  if (opts.mode == AveragingMode::Staggered) {
    StaggerSchedule sched{opts.stagger_base};
    restarts = sched.restarts_up_to(opts.horizon);
  }

  Vec lam;
  if (opts.mode == AveragingMode::OracleStart) {
    if (!opts.lambda_star) throw std::invalid_argument("oracle-start needs lambda*");
    lam = opts.lambda_star->concat();
  }

  std::int64_t next_checkpoint = 4;
  Vec gbuf;
  auto emit = [&](std::int64_t t_total) {
    if (window.T < 1) return;
    const Vec xb = window.mean_x();
    p.constraint_values(xb, gbuf);
    double mv = -std::numeric_limits<double>::infinity();
    for (double g : gbuf) mv = std::max(mv, g);
    if (gbuf.empty()) mv = 0.0;
    out.t.push_back(t_total);
    out.obj_gap.push_back(p.objective.value(xb) - opts.f_opt);
    out.viol.push_back(mv);
  };

  Engine engine(p, cfg);
  if (opts.mode == AveragingMode::OracleStart) {
    // Initial state might already be inside the ball.
    double s = 0.0;
    for (int j = 0; j < J; ++j) {
      const double d = engine.state().W[j] - opts.V * lam[j];
      s += d * d;
    }
    for (int i = 0; i < I; ++i) {
      const double d = engine.state().Z[i] - opts.V * lam[J + i];
      s += d * d;
    }
    if (std::sqrt(s) < opts.transient_ball) {
      averaging = true;
      out.T_hat = 0;
    }
  }

  engine.run_streamed([&](const SlotRecord& rec) {
    const std::int64_t t1 = rec.t + 1;
    switch (opts.mode) {
      case AveragingMode::FromZero:
        accumulate(window, rec.x, rec.y);
        if (t1 >= next_checkpoint || t1 == opts.horizon) {
          emit(t1);
          while (next_checkpoint <= t1) {
            next_checkpoint = std::max<std::int64_t>(
                next_checkpoint + 1,
                static_cast<std::int64_t>(next_checkpoint * opts.checkpoint_growth));
          }
        }
        break;
      case AveragingMode::Staggered:
        if (next_restart < restarts.size() && rec.t == restarts[next_restart]) {
          emit(rec.t);  // completed frame, evaluated at its end
          window.reset(I, rec.t);
          ++next_restart;
        }
        accumulate(window, rec.x, rec.y);
        if (t1 == opts.horizon) emit(t1);
        break;
      case AveragingMode::OracleStart: {
        if (!averaging) {
          double s = 0.0;
          for (int j = 0; j < J; ++j) {
            const double d = rec.W_next[j] - opts.V * lam[j];
            s += d * d;
          }
          for (int i = 0; i < I; ++i) {
            const double d = rec.Z_next[i] - opts.V * lam[J + i];
            s += d * d;
          }
          if (std::sqrt(s) < opts.transient_ball) {
            averaging = true;
            out.T_hat = t1;
            window.reset(I, t1);
            next_checkpoint = 4;
          }
        } else {
          accumulate(window, rec.x, rec.y);
          if (window.T >= next_checkpoint || t1 == opts.horizon) {
            emit(t1);
            while (next_checkpoint <= window.T) {
              next_checkpoint = std::max<std::int64_t>(
                  next_checkpoint + 1,
                  static_cast<std::int64_t>(next_checkpoint * opts.checkpoint_growth));
            }
          }
        }
        break;
      }
    }
  });
  return out;
}

std::optional<std::int64_t> slots_to_eps(const CheckpointSeries& s, double eps) {
  const std::size_t n = s.t.size();
  // Scan backward for the longest suffix on which the criterion always holds.
  std::size_t first_bad_after = n;  // index of last failing checkpoint + 1
  for (std::size_t k = n; k-- > 0;) {
    if (s.obj_gap[k] > eps || s.viol[k] > eps) {
      first_bad_after = k + 1;
      break;
    }
    first_bad_after = k;
  }
  if (first_bad_after >= n) return std::nullopt;
  return s.t[first_bad_after];
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("bad fit input");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  LogLogFit f;
  const double denom = n * sxx - sx * sx;
  f.exponent = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.exponent * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = f.intercept + f.exponent * std::log(x[i]);
    const double e = std::log(y[i]) - pred;
    ss_res += e * e;
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

std::vector<CurveRow> aggregate_series(const std::vector<CheckpointSeries>& runs) {
  // Key rows by (mode, V, checkpoint index); series from identical options
  // share the checkpoint grid.
  std::map<std::tuple<int, double, std::size_t>, std::vector<std::pair<double, double>>> cells;
  std::map<std::tuple<int, double, std::size_t>, std::int64_t> times;
  for (const auto& s : runs) {
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      const auto key = std::make_tuple(static_cast<int>(s.mode), s.V, k);
      cells[key].push_back({s.obj_gap[k], s.viol[k]});
      times[key] = s.t[k];
    }
  }
  std::vector<CurveRow> rows;
  for (const auto& [key, vals] : cells) {
    CurveRow r;
    r.mode = static_cast<AveragingMode>(std::get<0>(key));
    r.V = std::get<1>(key);
    r.t = times[key];
    r.replications = static_cast<int>(vals.size());
    double sg = 0, sv = 0;
    for (const auto& [g, v] : vals) {
      sg += std::abs(g);
      sv += v;
    }
    r.obj_gap_mean = sg / vals.size();
    r.viol_mean = sv / vals.size();
    double vg = 0, vv = 0;
    for (const auto& [g, v] : vals) {
      vg += (std::abs(g) - r.obj_gap_mean) * (std::abs(g) - r.obj_gap_mean);
      vv += (v - r.viol_mean) * (v - r.viol_mean);
    }
    if (vals.size() > 1) {
      r.obj_gap_se = std::sqrt(vg / (vals.size() - 1) / vals.size());
      r.viol_se = std::sqrt(vv / (vals.size() - 1) / vals.size());
    }
    rows.push_back(r);
  }
  return rows;
}

std::string curve_to_csv(const std::vector<CurveRow>& rows) {
  std::string out = "mode,V,t,obj_gap_mean,obj_gap_se,viol_mean,viol_se,replications\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%lld,%.17g,%.17g,%.17g,%.17g,%d\n",
                  averaging_mode_name(r.mode).c_str(), r.V, static_cast<long long>(r.t),
                  r.obj_gap_mean, r.obj_gap_se, r.viol_mean, r.viol_se, r.replications);
    out += buf;
  }
  return out;
}

}  // namespace dpp
