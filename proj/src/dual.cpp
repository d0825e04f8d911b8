#include "dpp/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpp/rng.hpp"
#include "dpp/slot_solvers.hpp"

namespace dpp {

Vec DualPoint::concat() const {
  Vec full;
  full.reserve(w.size() + z.size());
  full.insert(full.end(), w.begin(), w.end());
  full.insert(full.end(), z.begin(), z.end());
  return full;
}

DualPoint DualPoint::split(const Vec& full, int J, int I) {
  DualPoint p;
  p.w.assign(full.begin(), full.begin() + J);
  p.z.assign(full.begin() + J, full.begin() + J + I);
  return p;
}

DualValue dual_value(const StochasticProblem& p, const DualPoint& lambda) {
  const int I = p.decision_dim();
  const int J = p.constraint_dim();
  if (static_cast<int>(lambda.w.size()) != J || static_cast<int>(lambda.z.size()) != I) {
    throw std::invalid_argument("dual point dimension mismatch");
  }
  for (double wj : lambda.w) {
    if (wj < 0.0) throw std::invalid_argument("negative constraint multiplier");
  }

  DualValue dv;
  const YStepResult yr = y_step(p, 1.0, lambda.w, lambda.z);
  dv.y_minimizer = yr.point;

  // Shared y-infimum plus probability-weighted per-state x-infima.
  double val = yr.objective_value;  // f(y*) + w.g(y*) - z.y*
  Vec xavg(I, 0.0);
  dv.x_minimizers.reserve(p.states.size());
  for (const auto& s : p.states) {
    const XStepResult xr = x_step(s.points, lambda.z);
    val += s.prob * xr.objective_value;
    for (int i = 0; i < I; ++i) xavg[i] += s.prob * xr.point[i];
    dv.x_minimizers.push_back(xr.point);
    dv.x_indices.push_back(xr.index);
  }
  dv.value = val;

  dv.supergradient.resize(J + I);
  Vec gy;
  p.constraint_values(yr.point, gy);
  for (int j = 0; j < J; ++j) dv.supergradient[j] = gy[j];
  for (int i = 0; i < I; ++i) dv.supergradient[J + i] = xavg[i] - yr.point[i];
  return dv;
}

namespace {

void project_nonneg(Vec& full, int J) {
  for (int j = 0; j < J; ++j) full[j] = std::max(full[j], 0.0);
}

struct Evaluator {
  const StochasticProblem& p;
  int evals = 0;
  int J, I;

  DualValue operator()(const Vec& full) {
    ++evals;
    return dual_value(p, DualPoint::split(full, J, I));
  }
};

// Maximizes the concave dual over {w >= 0} with the ellipsoid method:
// feasibility cuts on negative w components, supergradient cuts elsewhere.
// Dimension here is tiny, so the volume argument converges in a few hundred
// evaluations regardless of kinks.
void ellipsoid_max(Evaluator& ev, Vec center, double radius, int J, int max_iters,
                   double* best_val, Vec* best_lambda) {
  const int n = static_cast<int>(center.size());
  if (n == 1) {
    // Degenerate ellipsoid; concave 1-d maximization by ternary search.
    double lo = std::max(J > 0 ? 0.0 : -1e300, center[0] - radius);
    double hi = center[0] + radius;
    for (int k = 0; k < 200; ++k) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      const double v1 = ev(Vec{m1}).value, v2 = ev(Vec{m2}).value;
      if (v1 < v2) {
        lo = m1;
      } else {
        hi = m2;
      }
      if (v1 > *best_val) {
        *best_val = v1;
        *best_lambda = Vec{m1};
      }
      if (v2 > *best_val) {
        *best_val = v2;
        *best_lambda = Vec{m2};
      }
    }
    return;
  }

  std::vector<Vec> P(n, Vec(n, 0.0));
  for (int i = 0; i < n; ++i) P[i][i] = radius * radius;
  Vec x = std::move(center);
  Vec a(n), Pa(n);
  const double nn = static_cast<double>(n);

  for (int k = 0; k < max_iters; ++k) {
    int neg = -1;
    for (int j = 0; j < J; ++j) {
      if (x[j] < 0.0) {
        neg = j;
        break;
      }
    }
    if (neg >= 0) {
      a.assign(n, 0.0);
      a[neg] = -1.0;  // keep the halfspace {y_neg >= 0}
    } else {
      const DualValue dv = ev(x);
      if (dv.value > *best_val) {
        *best_val = dv.value;
        *best_lambda = x;
      }
      for (int i = 0; i < n; ++i) a[i] = -dv.supergradient[i];  // keep {h.(y-x) >= 0}
    }
    double aPa = 0.0;
    for (int i = 0; i < n; ++i) {
      Pa[i] = 0.0;
      for (int j = 0; j < n; ++j) Pa[i] += P[i][j] * a[j];
    }
    for (int i = 0; i < n; ++i) aPa += a[i] * Pa[i];
    if (aPa <= 1e-300) break;
    const double denom = std::sqrt(aPa);
    for (int i = 0; i < n; ++i) x[i] -= Pa[i] / ((nn + 1.0) * denom);
    const double scale = nn * nn / (nn * nn - 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        P[i][j] = scale * (P[i][j] - 2.0 / (nn + 1.0) * Pa[i] * Pa[j] / aPa);
      }
    }
    // Keep the shape matrix symmetric against drift.
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double m = 0.5 * (P[i][j] + P[j][i]);
        P[i][j] = P[j][i] = m;
      }
    }
  }
}

// Polyak steps toward a fixed target level; returns the best point found.
void polyak_toward(Evaluator& ev, Vec& lambda, double target, int iterations, int J,
                   double* best_val, Vec* best_lambda) {
  for (int k = 0; k < iterations; ++k) {
    const DualValue dv = ev(lambda);
    if (dv.value > *best_val) {
      *best_val = dv.value;
      *best_lambda = lambda;
    }
    const double gap = target - dv.value;
    if (gap <= 0.0) return;
    const double hn = norm2(dv.supergradient);
    if (hn < 1e-22) return;
    const double step = gap / hn;
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] += step * dv.supergradient[i];
    project_nonneg(lambda, J);
  }
}

}  // namespace

DualSolution solve_dual(const StochasticProblem& p, const DualSolveOptions& opts) {
  const int I = p.decision_dim();
  const int J = p.constraint_dim();
  const int dim = I + J;
  Evaluator ev{p, 0, J, I};

  // Initialization scale from the data: multipliers live at the scale of
  // gradient ratios, which stays O(1..10) for sane instances.
  double scale = 1.0;
  scale = std::max(scale, norm(p.objective.gradient(p.extended_set.clamp(Vec(I, 0.0)))));

  CounterRng rng{opts.seed};
  std::uint64_t ctr = 0;
  auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(ctr++); };

  DualSolution sol;
  std::vector<Vec> starts;
  for (int s = 0; s < std::max(opts.starts, 1); ++s) {
    Vec l(dim);
    for (int j = 0; j < J; ++j) l[j] = unif(0.0, scale);
    for (int i = 0; i < I; ++i) l[J + i] = unif(-scale, scale);
    if (s == 0) l.assign(dim, 0.0);
    starts.push_back(std::move(l));
  }

  // Phase A: projected supergradient ascent with the diminishing schedule,
  // independently from every start. Coarse localization only.
  double best_val = -std::numeric_limits<double>::infinity();
  Vec best_lambda(dim, 0.0);
  std::vector<Vec> rough;
  auto record = [&](double v) {
    const double prev = sol.best_value_history.empty() ? v : sol.best_value_history.back();
    sol.best_value_history.push_back(std::max(prev, v));
  };
  for (const Vec& s0 : starts) {
    Vec l = s0;
    double local_best = -std::numeric_limits<double>::infinity();
    Vec local_best_l = l;
    for (int k = 0; k < opts.ascent_iterations; ++k) {
      const DualValue dv = ev(l);
      if (dv.value > local_best) {
        local_best = dv.value;
        local_best_l = l;
      }
      record(dv.value);
      const double hn = norm(dv.supergradient);
      if (hn < 1e-14) break;
      const double step = opts.ascent_step_a / (1.0 + opts.ascent_step_b * k);
      for (int i = 0; i < dim; ++i) l[i] += step * dv.supergradient[i] / hn;
      project_nonneg(l, J);
    }
    if (local_best > best_val) {
      best_val = local_best;
      best_lambda = local_best_l;
    }
    rough.push_back(local_best_l);
  }

  // Phase B: ellipsoid refinement around the best rough point. Two rounds,
  // the second recentred with a smaller radius, drive the value to solver
  // precision even across kinks.
  const double radius0 = 4.0 * (1.0 + norm(best_lambda)) + 2.0 * scale;
  ellipsoid_max(ev, best_lambda, radius0, J, 120 * dim + 600, &best_val, &best_lambda);
  sol.best_value_history.push_back(best_val);
  const double mid_val = best_val;
  ellipsoid_max(ev, best_lambda, 0.05 * radius0 + 1e-6, J, 120 * dim + 600, &best_val,
                &best_lambda);
  sol.best_value_history.push_back(best_val);
  sol.converged =
      (best_val - mid_val) <= std::max(opts.value_tol, 1e-9 * std::max(1.0, std::abs(best_val)));

  // Phase C: one endpoint per start, maximizing d with an infinitesimal
  // random linear tiebreak. A unique maximizer absorbs every tiebreak; a
  // continuum of multipliers spreads the endpoints across its extreme
  // points, which is what the spread statistic measures.
  const double kappa =
      1e-7 * std::max(1.0, std::abs(best_val)) / (radius0 + norm(best_lambda) + 1.0);
  for (std::size_t s = 0; s < rough.size(); ++s) {
    Vec u(dim);
    double un = 0.0;
    for (int i = 0; i < dim; ++i) {
      u[i] = 2.0 * rng.uniform(ctr++) - 1.0;
      un += u[i] * u[i];
    }
    const double inv = 1.0 / std::max(std::sqrt(un), 1e-12);
    for (double& v : u) v *= inv;

    struct TiltedEvaluator {
      Evaluator* base;
      const Vec* tilt;
      double kappa;
      DualValue operator()(const Vec& full) {
        DualValue dv = (*base)(full);
        for (std::size_t i = 0; i < full.size(); ++i) {
          dv.value += kappa * (*tilt)[i] * full[i];
          dv.supergradient[i] += kappa * (*tilt)[i];
        }
        return dv;
      }
    } tilted{&ev, &u, kappa};

    double tv = -std::numeric_limits<double>::infinity();
    Vec te = best_lambda;
    ellipsoid_max(tilted, best_lambda, radius0, J, 120 * dim + 600, &tv, &te);
    sol.endpoints.push_back(DualPoint::split(te, J, I));
    const double plain = ev(te).value;
    if (plain > best_val) {
      best_val = plain;
      best_lambda = te;
    }
  }
  (void)rough;

  double spread = 0.0;
  for (std::size_t a = 0; a < sol.endpoints.size(); ++a) {
    for (std::size_t b = a + 1; b < sol.endpoints.size(); ++b) {
      spread = std::max(spread, dist(sol.endpoints[a].concat(), sol.endpoints[b].concat()));
    }
  }
  sol.multi_start_spread = spread;
  sol.unique_flag = spread < opts.uniqueness_tol;
  sol.lambda_star = DualPoint::split(best_lambda, J, I);
  sol.d_star = best_val;
  sol.f_opt = best_val;
  sol.primal_estimate = std::numeric_limits<double>::quiet_NaN();
  if (I <= 3) {
    try {
      sol.primal_estimate = primal_grid_opt(p, 500);
    } catch (const std::exception&) {
      // infeasible at grid resolution; keep NaN, the gap check is skipped
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Primal grid oracle.

namespace {

struct WeightBox {
  Vec lo, hi;  // per-vertex weight bounds, intersected with the simplex
};

void enumerate_weights(const WeightBox& box, int m, int coord, Vec& w, double partial,
                       std::vector<Vec>& out) {
  const int k = static_cast<int>(box.lo.size());
  if (coord == k - 1) {
    const double last = 1.0 - partial;
    if (last >= box.lo[coord] - 1e-12 && last <= box.hi[coord] + 1e-12 && last >= -1e-12) {
      w[coord] = std::max(last, 0.0);
      out.push_back(w);
    }
    return;
  }
  const double width = box.hi[coord] - box.lo[coord];
  for (int j = 0; j <= m; ++j) {
    const double v = box.lo[coord] + width * j / m;
    if (partial + v > 1.0 + 1e-12) break;
    w[coord] = v;
    enumerate_weights(box, m, coord + 1, w, partial + v, out);
  }
}

}  // namespace

double primal_grid_opt(const StochasticProblem& p, int resolution) {
  const int I = p.decision_dim();
  if (I > 3) throw std::invalid_argument("primal grid oracle is desk scale (I <= 3)");
  if (resolution < 1) throw std::invalid_argument("resolution must be positive");

  const int n_states = static_cast<int>(p.states.size());
  double lip_g = 0.0;
  for (const auto& g : p.constraints) lip_g = std::max(lip_g, g.lipschitz_bound);

  // Per-level lattice density, capped so the joint product stays tractable.
  int m = 12;
  double joint = 1.0;
  for (const auto& s : p.states) {
    const int k = static_cast<int>(s.points.size());
    for (int i = 1; i < k; ++i) joint *= (m + i);  // ~ binom(m+k-1, k-1) growth
  }
  while (joint > 5.0e7 && m > 2) {
    joint = 1.0;
    --m;
    for (const auto& s : p.states) {
      const int k = static_cast<int>(s.points.size());
      for (int i = 1; i < k; ++i) joint *= (m + i);
    }
  }

  const int levels =
      std::max(3, static_cast<int>(std::ceil(std::log(4.0 * resolution / m) / std::log(4.0))));

  std::vector<WeightBox> boxes(n_states);
  for (int s = 0; s < n_states; ++s) {
    const int k = static_cast<int>(p.states[s].points.size());
    boxes[s].lo.assign(k, 0.0);
    boxes[s].hi.assign(k, 1.0);
  }

  double diam = 0.0;
  {
    const Box bb = p.bounding_box();
    for (int i = 0; i < I; ++i) diam = std::max(diam, bb.upper[i] - bb.lower[i]);
  }

  // Exact-penalty score: for convex instances with a Slater point, any
  // penalty weight above the largest multiplier makes the penalized minimum
  // coincide with the constrained one, so zooming on the score never locks
  // onto an infeasible corner.
  const double penalty = 1e4 * std::max(1.0, p.objective.lipschitz_bound);

  double best_score = std::numeric_limits<double>::infinity();
  double best_val = std::numeric_limits<double>::infinity();
  double best_viol = std::numeric_limits<double>::infinity();
  std::vector<Vec> best_weights(n_states);
  Vec gbuf;
  double final_pitch = 0.0;

  for (int level = 0; level < levels; ++level) {
    // Candidate points per state for the current weight boxes.
    std::vector<std::vector<Vec>> weights(n_states);
    std::vector<std::vector<Vec>> points(n_states);
    double pitch = 0.0;
    for (int s = 0; s < n_states; ++s) {
      Vec w(p.states[s].points.size(), 0.0);
      enumerate_weights(boxes[s], m, 0, w, 0.0, weights[s]);
      if (weights[s].empty()) throw std::runtime_error("no feasible grid point");
      for (const Vec& wt : weights[s]) {
        Vec pt(I, 0.0);
        for (std::size_t v = 0; v < wt.size(); ++v) {
          for (int i = 0; i < I; ++i) pt[i] += wt[v] * p.states[s].points[v][i];
        }
        points[s].push_back(std::move(pt));
      }
      double width = 0.0;
      for (std::size_t c = 0; c < boxes[s].lo.size(); ++c) {
        width = std::max(width, boxes[s].hi[c] - boxes[s].lo[c]);
      }
      pitch = std::max(pitch, width / m);
    }
    final_pitch = pitch;

    // Joint sweep over the product of per-state candidate lists.
    std::vector<std::size_t> idx(n_states, 0);
    best_score = std::numeric_limits<double>::infinity();
    while (true) {
      Vec xbar(I, 0.0);
      for (int s = 0; s < n_states; ++s) {
        const Vec& pt = points[s][idx[s]];
        for (int i = 0; i < I; ++i) xbar[i] += p.states[s].prob * pt[i];
      }
      p.constraint_values(xbar, gbuf);
      double viol = 0.0;
      for (double gv : gbuf) viol += std::max(gv, 0.0);
      const double v = p.objective.value(xbar);
      const double score = v + penalty * viol;
      if (score < best_score) {
        best_score = score;
        best_val = v;
        best_viol = viol;
        for (int s = 0; s < n_states; ++s) best_weights[s] = weights[s][idx[s]];
      }
      int s = 0;
      while (s < n_states && ++idx[s] == points[s].size()) {
        idx[s] = 0;
        ++s;
      }
      if (s == n_states) break;
    }

    // Shrink each state's weight box around the incumbent.
    for (int s = 0; s < n_states; ++s) {
      for (std::size_t c = 0; c < boxes[s].lo.size(); ++c) {
        const double width = (boxes[s].hi[c] - boxes[s].lo[c]) / 4.0;
        const double center = best_weights[s][c];
        boxes[s].lo[c] = std::max(0.0, center - width / 2.0);
        boxes[s].hi[c] = std::min(1.0, center + width / 2.0);
      }
    }
  }
  const double grid_slack = lip_g * diam * final_pitch + 1e-9;
  if (best_viol > grid_slack) throw std::runtime_error("no feasible grid point");
  return best_val;
}

// ---------------------------------------------------------------------------
// Dual geometry probing.

GeometryEstimate probe_geometry(const StochasticProblem& p, const DualSolution& solution,
                                const GeometryProbeOptions& opts) {
  GeometryEstimate est;
  if (!solution.unique_flag) return est;  // undetermined

  const int J = p.constraint_dim();
  const int I = p.decision_dim();
  const int dim = J + I;
  const Vec center = solution.lambda_star.concat();
  const double d_star = solution.d_star;

  CounterRng rng{opts.seed};
  std::uint64_t ctr = 0;
  auto gauss = [&]() {
    // Box-Muller on counter draws.
    const double u1 = std::max(rng.uniform(ctr++), 1e-300);
    const double u2 = rng.uniform(ctr++);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };

  std::vector<Vec> dirs;
  for (int i = 0; i < dim; ++i) {
    Vec u(dim, 0.0);
    u[i] = 1.0;
    dirs.push_back(u);
    u[i] = -1.0;
    dirs.push_back(u);
  }
  auto add_random = [&](int lo, int hi) {
    Vec u(dim, 0.0);
    double n2 = 0.0;
    for (int i = lo; i < hi; ++i) {
      u[i] = gauss();
      n2 += u[i] * u[i];
    }
    if (n2 < 1e-20) return;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& v : u) v *= inv;
    dirs.push_back(std::move(u));
  };
  for (int k = 0; k < opts.random_directions; ++k) add_random(0, dim);
  if (J > 0) {
    for (int k = 0; k < opts.random_directions / 3 + 1; ++k) add_random(0, J);
  }
  for (int k = 0; k < opts.random_directions / 3 + 1; ++k) add_random(J, dim);

  struct Probe {
    double r;
    double decay;
  };
  double min_slope = std::numeric_limits<double>::infinity();
  double min_curvature = std::numeric_limits<double>::infinity();
  double min_far_slope = std::numeric_limits<double>::infinity();
  double exp_min = std::numeric_limits<double>::infinity();
  double exp_max = -std::numeric_limits<double>::infinity();
  double S = 0.0;
  int samples = 0;
  std::vector<std::vector<Probe>> all_probes;

  for (const Vec& u : dirs) {
    // Stay inside w >= 0: limit the ray length before a w component crosses 0.
    double rmax = std::numeric_limits<double>::infinity();
    for (int j = 0; j < J; ++j) {
      if (u[j] < -1e-12) rmax = std::min(rmax, center[j] / -u[j]);
    }
    std::vector<Probe> probes;
    for (double r : opts.radii) {
      if (r > rmax) continue;
      Vec l = center;
      for (int i = 0; i < dim; ++i) l[i] += r * u[i];
      project_nonneg(l, J);
      const double d = dual_value(p, DualPoint::split(l, J, I)).value;
      const double decay = d_star - d;
      if (decay <= 1e-12) continue;  // below solver resolution
      probes.push_back({r, decay});
      ++samples;
    }
    if (probes.size() < 3) continue;

    // Log-log decay exponent over the three smallest usable radii.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < 3; ++k) {
      const double lx = std::log(probes[k].r), ly = std::log(probes[k].decay);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double slope_exp = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    exp_min = std::min(exp_min, slope_exp);
    exp_max = std::max(exp_max, slope_exp);

    for (const Probe& pr : probes) {
      min_slope = std::min(min_slope, pr.decay / pr.r);
      min_curvature = std::min(min_curvature, pr.decay / (pr.r * pr.r));
    }
    // Largest radius where a pure quadratic model still fits this ray within
    // 10% in log value.
    const double c2 = probes[0].decay / (probes[0].r * probes[0].r);
    double s_u = probes[0].r;
    for (const Probe& pr : probes) {
      const double fitted = c2 * pr.r * pr.r;
      if (std::abs(std::log(pr.decay) - std::log(fitted)) < 0.1) s_u = std::max(s_u, pr.r);
    }
    S = std::max(S, s_u);
    all_probes.push_back(std::move(probes));
  }

  est.sample_count = samples;
  if (all_probes.empty()) return est;

  if (exp_max <= 1.35) {
    est.kind = GeometryEstimate::Kind::Polyhedral;
    est.L_P = min_slope;
  } else if (exp_max >= 1.65) {
    est.kind = GeometryEstimate::Kind::NonPolyhedral;
    est.S = S;
    double lg = std::numeric_limits<double>::infinity();
    double lgp = std::numeric_limits<double>::infinity();
    bool far_seen = false;
    for (const auto& probes : all_probes) {
      for (const Probe& pr : probes) {
        if (pr.r <= S) {
          lg = std::min(lg, pr.decay / (pr.r * pr.r));
        } else {
          lgp = std::min(lgp, pr.decay / pr.r);
          far_seen = true;
        }
      }
    }
    est.L_G = lg;
    est.L_G_prime = far_seen ? lgp : min_slope;
    (void)min_far_slope;
  }
  return est;
}

std::string geometry_kind_name(GeometryEstimate::Kind k) {
  switch (k) {
    case GeometryEstimate::Kind::Polyhedral:
      return "polyhedral";
    case GeometryEstimate::Kind::NonPolyhedral:
      return "non-polyhedral";
    default:
      return "undetermined";
  }
}

}  // namespace dpp
