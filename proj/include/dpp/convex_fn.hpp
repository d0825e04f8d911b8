#pragma once

#include <stdexcept>

#include "dpp/vec.hpp"

namespace dpp {

struct Box;

/// Convex cost/constraint function on R^I. Two closed forms are supported:
///   affine:               f(x) = a.x + b
///   separable quadratic:  f(x) = sum_i (q_i x_i^2 + c_i x_i) + b,  q >= 0
/// Both give closed-form box minimization and exact gradients, which is what
/// the per-slot subproblems and the dual oracle rely on.
struct ConvexFn {
  enum class Kind { Affine, SeparableQuadratic };

  Kind kind = Kind::Affine;
  Vec a;  // affine coefficients (affine kind)
  Vec q;  // quadratic coefficients, q >= 0 (quadratic kind)
  Vec c;  // linear coefficients (quadratic kind)
  double b = 0.0;
  double lipschitz_bound = 0.0;  // over the extended set; filled at load

  static ConvexFn affine(Vec coeffs, double offset);
  static ConvexFn quadratic(Vec quad, Vec lin, double offset);

  int dim() const { return static_cast<int>(kind == Kind::Affine ? a.size() : q.size()); }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;

  /// Coefficients of the 1-d restriction along coordinate i:
  /// value contribution  quad*x_i^2 + lin*x_i. Zero quad for affine.
  void coordinate_terms(int i, double* quad, double* lin) const;
};

/// Upper bound on the Lipschitz constant of fn over box: ||a|| for affine,
/// max gradient norm over box corners for separable quadratics (attained at a
/// corner since each |2 q_i x_i + c_i| is maximized at an endpoint).
double lipschitz_estimate(const ConvexFn& fn, const Box& box);

}  // namespace dpp
