#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dpp/experiment.hpp"
#include "dpp/problem.hpp"
#include "dpp/rng.hpp"

using namespace dpp;

TEST_CASE("builtin instance is valid") {
  const auto p = builtin_problem("sim-linear");
  CHECK(validate(p).empty());
  CHECK(p.decision_dim() == 2);
  CHECK(p.constraint_dim() == 2);
  CHECK(p.states.size() == 3);
  CHECK(p.extended_set.lower == Vec{-5, -10});
  CHECK(p.extended_set.upper == Vec{5, 10});
}

TEST_CASE("validate reports probability mass and containment violations") {
  auto p = builtin_problem("sim-linear");
  p.states[0].prob = 0.0;  // mass now 0.9
  auto v = validate(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("probabilities sum to 0.9") != std::string::npos);

  p = builtin_problem("sim-linear");
  p.states[1].points.push_back({50, 0});
  v = validate(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("point outside Y") != std::string::npos);

  p = builtin_problem("sim-linear");
  p.states[2].points.clear();
  v = validate(p);
  CHECK(!v.empty());
}

TEST_CASE("validate is idempotent and side-effect free") {
  const auto p = builtin_problem("sim-quadratic");
  const auto a = validate(p);
  const auto b = validate(p);
  CHECK(a == b);
}

TEST_CASE("degenerate instance has C = 0") {
  StochasticProblem p;
  p.states.push_back({0, 1.0, {{0.0, 0.0}}});
  p.objective = ConvexFn::affine({0, 0}, 0);
  p.extended_set = Box{{0, 0}, {0, 0}};
  CHECK(compute_C(p) == doctest::Approx(0.0));
}

TEST_CASE("C is monotone when the extended set grows") {
  auto p = builtin_problem("sim-linear");
  const double c1 = compute_C(p);
  for (int i = 0; i < 2; ++i) {
    p.extended_set.lower[i] *= 2.0;
    p.extended_set.upper[i] *= 2.0;
  }
  const double c2 = compute_C(p);
  CHECK(c2 >= c1);
}

TEST_CASE("C upper-bounds the drift integrand on sampled pairs") {
  // Independent sampling oracle: x a random convex combination of all
  // vertices, y uniform in Y.
  const auto p = builtin_problem("sim-linear");
  const double C = compute_C(p);

  // Frozen golden value, cross-checked by the corner/vertex enumeration
  // below (the sup sits at y = (-5,-10) against x = (0,10)).
  CHECK(C == doctest::Approx(794.75).epsilon(1e-12));

  const auto pts = p.all_points();
  CounterRng rng{7};
  std::uint64_t ctr = 0;
  Vec g;
  for (int k = 0; k < 10000; ++k) {
    Vec weights(pts.size());
    double tot = 0.0;
    for (auto& w : weights) {
      w = rng.uniform(ctr++);
      tot += w;
    }
    Vec x(p.decision_dim(), 0.0);
    for (std::size_t v = 0; v < pts.size(); ++v) {
      for (int i = 0; i < p.decision_dim(); ++i) x[i] += weights[v] / tot * pts[v][i];
    }
    Vec y(p.decision_dim());
    for (int i = 0; i < p.decision_dim(); ++i) {
      y[i] = p.extended_set.lower[i] +
             (p.extended_set.upper[i] - p.extended_set.lower[i]) * rng.uniform(ctr++);
    }
    p.constraint_values(y, g);
    CHECK(norm2(g) + norm2(x - y) <= 2.0 * C + 1e-9);
  }
}

TEST_CASE("C bound stays valid for quadratic constraints") {
  auto p = builtin_problem("sim-linear");
  p.constraints.push_back(ConvexFn::quadratic({0.1, 0.1}, {0, 0}, -5.0));
  p.constraints.back().lipschitz_bound = lipschitz_estimate(p.constraints.back(), p.extended_set);
  const double C = compute_C(p);
  CounterRng rng{9};
  std::uint64_t ctr = 0;
  Vec g;
  const auto pts = p.all_points();
  for (int k = 0; k < 5000; ++k) {
    const Vec& x = pts[static_cast<std::size_t>(rng.uniform(ctr++) * pts.size())];
    Vec y(p.decision_dim());
    for (int i = 0; i < p.decision_dim(); ++i) {
      y[i] = p.extended_set.lower[i] +
             (p.extended_set.upper[i] - p.extended_set.lower[i]) * rng.uniform(ctr++);
    }
    p.constraint_values(y, g);
    CHECK(norm2(g) + norm2(x - y) <= 2.0 * C + 1e-9);
  }
}

TEST_CASE("JSON round trip preserves the instance") {
  const auto p = builtin_problem("sim-quadratic-nonunique");
  const auto q = problem_from_json(problem_to_json(p));
  CHECK(q.states.size() == p.states.size());
  CHECK(q.constraint_dim() == p.constraint_dim());
  CHECK(q.objective.kind == ConvexFn::Kind::SeparableQuadratic);
  CHECK(q.extended_set.lower == p.extended_set.lower);
  CHECK(q.states[1].points == p.states[1].points);
  CHECK(q.objective.lipschitz_bound == doctest::Approx(p.objective.lipschitz_bound));
}

TEST_CASE("extended set defaults to the bounding box of the decision points") {
  const std::string j = R"({
    "states": [
      {"id": 0, "prob": 0.5, "points": [[0, 0], [2, -3]]},
      {"id": 1, "prob": 0.5, "points": [[-1, 4]]}
    ],
    "objective": {"kind": "affine", "a": [1, 1], "b": 0}
  })";
  const auto p = problem_from_json(j);
  CHECK(p.extended_set.lower == Vec{-1, -3});
  CHECK(p.extended_set.upper == Vec{2, 4});
  CHECK(validate(p).empty());
}
