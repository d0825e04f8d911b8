#pragma once

#include "dpp/problem.hpp"
#include "dpp/vec.hpp"

namespace dpp {

struct XStepResult {
  Vec point;
  int index = 0;            // ordinal of the chosen vertex
  double objective_value = 0.0;  // Z.x at the minimizer
};

struct YStepResult {
  enum class Method { ClosedForm, ProjectedGradient };
  Vec point;
  double objective_value = 0.0;  // V f(y) + W.g(y) - Z.y at the minimizer
  Method method = Method::ClosedForm;
  int iterations = 0;
};

/// min Z.x over a finite point set, full enumeration, ties to the lowest index.
XStepResult x_step(const std::vector<Vec>& decision_set, const Vec& Z);

/// min over the extended box of V f(y) + W.g(y) - Z.y. With affine or
/// separable-quadratic f and g the objective separates per coordinate and is
/// solved in closed form (zero effective slope picks the lower bound).
YStepResult y_step(const StochasticProblem& p, double V, const Vec& W, const Vec& Z);

/// Same subproblem via projected gradient with fixed step 1/L; kept as an
/// independent route for auditing the closed form.
YStepResult y_step_projected_gradient(const StochasticProblem& p, double V, const Vec& W,
                                      const Vec& Z, double improvement_tol = 1e-12,
                                      int max_iterations = 100000);

/// Effective per-coordinate coefficients of the y-step objective:
/// sum_i A_i y_i^2 + B_i y_i (+ const). Exposed for reuse by the engine loop.
void y_step_coefficients(const StochasticProblem& p, double V, const Vec& W, const Vec& Z,
                         Vec& A, Vec& B);

}  // namespace dpp
