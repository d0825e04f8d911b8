#include "dpp/slot_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpp {

XStepResult x_step(const std::vector<Vec>& decision_set, const Vec& Z) {
  if (decision_set.empty()) throw std::invalid_argument("empty decision set");
  XStepResult r;
  r.index = 0;
  r.objective_value = dot(Z, decision_set[0]);
  for (std::size_t k = 1; k < decision_set.size(); ++k) {
    const double v = dot(Z, decision_set[k]);
    if (v < r.objective_value) {
      r.objective_value = v;
      r.index = static_cast<int>(k);
    }
  }
  r.point = decision_set[r.index];
  return r;
}

void y_step_coefficients(const StochasticProblem& p, double V, const Vec& W, const Vec& Z,
                         Vec& A, Vec& B) {
  const int I = p.decision_dim();
  A.assign(I, 0.0);
  B.assign(I, 0.0);
  double quad, lin;
  for (int i = 0; i < I; ++i) {
    p.objective.coordinate_terms(i, &quad, &lin);
    A[i] = V * quad;
    B[i] = V * lin - Z[i];
  }
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    if (W[j] < 0.0) throw std::invalid_argument("invalid multiplier");
    for (int i = 0; i < I; ++i) {
      p.constraints[j].coordinate_terms(i, &quad, &lin);
      A[i] += W[j] * quad;
      B[i] += W[j] * lin;
    }
  }
}

namespace {

double y_objective(const StochasticProblem& p, double V, const Vec& W, const Vec& Z,
                   const Vec& y) {
  double v = V * p.objective.value(y) - dot(Z, y);
  for (std::size_t j = 0; j < p.constraints.size(); ++j) v += W[j] * p.constraints[j].value(y);
  return v;
}

}  // namespace

YStepResult y_step(const StochasticProblem& p, double V, const Vec& W, const Vec& Z) {
  const Box& Y = p.extended_set;
  Vec A, B;
  y_step_coefficients(p, V, W, Z, A, B);

  YStepResult r;
  r.method = YStepResult::Method::ClosedForm;
  r.point.resize(Y.dim());
  for (int i = 0; i < Y.dim(); ++i) {
    if (A[i] > 0.0) {
      r.point[i] = std::min(std::max(-B[i] / (2.0 * A[i]), Y.lower[i]), Y.upper[i]);
    } else if (B[i] < 0.0) {
      r.point[i] = Y.upper[i];
    } else {
      r.point[i] = Y.lower[i];  // B >= 0, including the tie at zero slope
    }
  }
  r.objective_value = y_objective(p, V, W, Z, r.point);
  return r;
}

YStepResult y_step_projected_gradient(const StochasticProblem& p, double V, const Vec& W,
                                      const Vec& Z, double improvement_tol, int max_iterations) {
  const Box& Y = p.extended_set;
  Vec A, B;
  y_step_coefficients(p, V, W, Z, A, B);

  double curvature = 0.0;
  for (double a : A) curvature = std::max(curvature, 2.0 * a);
  // Pure affine objectives have zero curvature; a tiny L makes the step huge
  // and the projection lands on the optimal face in one move.
  const double L = std::max(curvature, 1e-9);

  Vec y(Y.dim());
  for (int i = 0; i < Y.dim(); ++i) y[i] = 0.5 * (Y.lower[i] + Y.upper[i]);
  y = Y.clamp(std::move(y));

  YStepResult r;
  r.method = YStepResult::Method::ProjectedGradient;
  double prev = y_objective(p, V, W, Z, y);
  int it = 0;
  for (; it < max_iterations; ++it) {
    for (int i = 0; i < Y.dim(); ++i) {
      const double grad = 2.0 * A[i] * y[i] + B[i];
      y[i] = std::min(std::max(y[i] - grad / L, Y.lower[i]), Y.upper[i]);
    }
    const double cur = y_objective(p, V, W, Z, y);
    if (prev - cur < improvement_tol) {
      prev = std::min(prev, cur);
      ++it;
      break;
    }
    prev = cur;
  }
  r.point = std::move(y);
  r.objective_value = prev;
  r.iterations = it;
  return r;
}

}  // namespace dpp
