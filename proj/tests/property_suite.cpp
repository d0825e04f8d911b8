// Randomized property checks over generated instances: dual concavity and
// supergradient inequalities, weak duality against the grid oracle, bounded
// distance increments along real runs, per-slot optimality audits, and the
// determinism contract.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpp/dual.hpp"
#include "dpp/engine.hpp"
#include "dpp/rng.hpp"
#include "dpp/slot_solvers.hpp"
#include "random_instances.hpp"

using namespace dpp;
using dpp_testing::Gen;
using dpp_testing::random_instance;
using dpp_testing::random_lambda;

TEST_CASE("randomized instance suite: 200 generated cases") {
  int grid_checked = 0;
  for (std::uint64_t case_id = 0; case_id < 200; ++case_id) {
    CAPTURE(case_id);
    const auto p = random_instance(1000 + case_id);
    REQUIRE(validate(p).empty());
    Gen g{CounterRng{77000 + case_id}};

    // Dual concavity and the supergradient inequality.
    for (int k = 0; k < 12; ++k) {
      const auto a = random_lambda(p, g, 3.0);
      const auto b = random_lambda(p, g, 3.0);
      const auto da = dual_value(p, a);
      const auto db = dual_value(p, b);
      DualPoint mid;
      mid.w.resize(a.w.size());
      mid.z.resize(a.z.size());
      for (std::size_t j = 0; j < a.w.size(); ++j) mid.w[j] = 0.5 * (a.w[j] + b.w[j]);
      for (std::size_t i = 0; i < a.z.size(); ++i) mid.z[i] = 0.5 * (a.z[i] + b.z[i]);
      CHECK(dual_value(p, mid).value >= 0.5 * da.value + 0.5 * db.value - 1e-9);
      CHECK(db.value <= da.value + dot(da.supergradient, b.concat() - a.concat()) + 1e-9);
    }

    // Weak duality against the primal grid (subsampled; the grid oracle
    // dominates the suite's runtime).
    if (case_id % 4 == 0) {
      const double grid = primal_grid_opt(p, 60);
      ++grid_checked;
      for (int k = 0; k < 6; ++k) {
        const auto l = random_lambda(p, g, 2.0);
        CHECK(dual_value(p, l).value <= grid + 0.05 * std::max(1.0, std::abs(grid)));
      }
    }

    // One short run: increment bound, per-slot audits, determinism.
    RunConfig cfg;
    cfg.V = g.unif(5, 150);
    cfg.horizon = 400;
    cfg.seed = 555 + case_id;
    const double C = compute_C(p);
    const double inc_bound = std::sqrt(2.0 * C) + 1e-9;
    // Any fixed reference point works for the increment property; a crude
    // dual point keeps the suite fast.
    const auto ref = random_lambda(p, g, 1.0).concat();
    const int J = p.constraint_dim();
    const int I = p.decision_dim();

    auto dist_ref = [&](const Vec& W, const Vec& Z) {
      double s = 0.0;
      for (int j = 0; j < J; ++j) {
        const double d = W[j] - cfg.V * ref[j];
        s += d * d;
      }
      for (int i = 0; i < I; ++i) {
        const double d = Z[i] - cfg.V * ref[J + i];
        s += d * d;
      }
      return std::sqrt(s);
    };

    Engine e(p, cfg);
    double prevK = dist_ref(e.state().W, e.state().Z);
    Gen audit{CounterRng{911 + case_id}};
    e.run_streamed([&](const SlotRecord& rec) {
      const double K = dist_ref(rec.W_next, rec.Z_next);
      CHECK(std::abs(K - prevK) <= inc_bound);
      prevK = K;

      CHECK(rec.drift <= rec.bound_rhs + 1e-9);
      for (double w : rec.W_next) CHECK(w >= 0.0);

      // x-step exactness: no vertex does better.
      const auto& pts = p.states[p.state_index(rec.omega)].points;
      const double xv = dot(rec.Z, rec.x);
      for (const auto& q : pts) CHECK(xv <= dot(rec.Z, q) + 1e-12);

      // y-step optimality against random feasible points.
      if (rec.t % 50 == 0) {
        double yv = cfg.V * p.objective.value(rec.y) - dot(rec.Z, rec.y);
        Vec gy;
        p.constraint_values(rec.y, gy);
        for (int j = 0; j < J; ++j) yv += rec.W[j] * gy[j];
        for (int k = 0; k < 20; ++k) {
          Vec y(I);
          for (int i = 0; i < I; ++i) {
            y[i] = p.extended_set.lower[i] +
                   (p.extended_set.upper[i] - p.extended_set.lower[i]) *
                       audit.rng.uniform(audit.ctr++);
          }
          double v = cfg.V * p.objective.value(y) - dot(rec.Z, y);
          p.constraint_values(y, gy);
          for (int j = 0; j < J; ++j) v += rec.W[j] * gy[j];
          CHECK(yv <= v + 1e-9);
        }
      }
    });

    // Determinism: identical seeds, identical bytes.
    cfg.horizon = 120;
    const auto csv_a = trace_to_csv(Engine(p, cfg).run());
    const auto csv_b = trace_to_csv(Engine(p, cfg).run());
    CHECK(csv_a == csv_b);
  }
  CHECK(grid_checked == 50);
}
