#pragma once

#include <string>
#include <vector>

#include "dpp/convex_fn.hpp"
#include "dpp/vec.hpp"

namespace dpp {

/// Axis-aligned hyper-rectangle, the extended set the auxiliary vector lives in.
struct Box {
  Vec lower;
  Vec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& x, double slack = 0.0) const;
  Vec clamp(Vec x) const;
  /// Corner selected by bitmask (bit i set -> upper bound on coordinate i).
  Vec corner(unsigned mask) const;
  unsigned corner_count() const { return 1u << dim(); }
};

struct RandomState {
  int id = 0;
  double prob = 0.0;
  std::vector<Vec> points;  // vertex set of the per-state decision set
};

/// A full problem instance: i.i.d. random states with finite decision sets,
/// a convex objective and convex inequality constraints acting on the time
/// average, plus the extended box set.
struct StochasticProblem {
  std::vector<RandomState> states;
  ConvexFn objective;
  std::vector<ConvexFn> constraints;
  Box extended_set;

  int decision_dim() const { return extended_set.dim(); }
  int constraint_dim() const { return static_cast<int>(constraints.size()); }
  int state_index(int id) const;  // -1 if unknown id

  /// g(y) as a vector; out must have constraint_dim() entries.
  void constraint_values(const Vec& y, Vec& out) const;

  /// Vertices of all decision sets pooled (used for hull enumeration).
  std::vector<Vec> all_points() const;

  /// Axis-aligned bounding box of all decision points.
  Box bounding_box() const;
};

/// Every invariant violation found, as human-readable strings; empty = valid.
std::vector<std::string> validate(const StochasticProblem& p);

/// Upper bound on sup_{x in hull(points), y in Y} [||g(y)||^2 + ||x-y||^2]/2.
/// Exact (joint vertex x corner enumeration) when all constraints are affine;
/// for quadratic constraints the g-term is bounded per constraint via exact
/// per-coordinate range analysis, which stays a valid upper bound.
double compute_C(const StochasticProblem& p);

/// JSON I/O. Schema (see README): states[{id,prob,points}], objective,
/// constraints[{kind,a|q,c,b}], optional extended_set{lower,upper}.
StochasticProblem problem_from_json(const std::string& json_text);
StochasticProblem problem_from_file(const std::string& path);
std::string problem_to_json(const StochasticProblem& p);

}  // namespace dpp
