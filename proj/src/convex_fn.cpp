#include "dpp/convex_fn.hpp"

#include <algorithm>
#include <cmath>

#include "dpp/problem.hpp"

namespace dpp {

ConvexFn ConvexFn::affine(Vec coeffs, double offset) {
  ConvexFn f;
  f.kind = Kind::Affine;
  f.a = std::move(coeffs);
  f.b = offset;
  return f;
}

ConvexFn ConvexFn::quadratic(Vec quad, Vec lin, double offset) {
  ConvexFn f;
  f.kind = Kind::SeparableQuadratic;
  for (double qi : quad) {
    if (qi < 0.0) throw std::invalid_argument("quadratic coefficients must be nonnegative");
  }
  f.q = std::move(quad);
  f.c = std::move(lin);
  if (f.c.empty()) f.c.assign(f.q.size(), 0.0);
  if (f.c.size() != f.q.size()) throw std::invalid_argument("q/c dimension mismatch");
  f.b = offset;
  return f;
}

double ConvexFn::value(const Vec& x) const {
  if (kind == Kind::Affine) return dot(a, x) + b;
  double s = b;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * x[i] * x[i] + c[i] * x[i];
  return s;
}

Vec ConvexFn::gradient(const Vec& x) const {
  if (kind == Kind::Affine) return a;
  Vec g(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) g[i] = 2.0 * q[i] * x[i] + c[i];
  return g;
}

void ConvexFn::coordinate_terms(int i, double* quad, double* lin) const {
  if (kind == Kind::Affine) {
    *quad = 0.0;
    *lin = a[i];
  } else {
    *quad = q[i];
    *lin = c[i];
  }
}

double lipschitz_estimate(const ConvexFn& fn, const Box& box) {
  if (fn.kind == ConvexFn::Kind::Affine) return norm(fn.a);
  // Gradient component 2 q_i x_i + c_i has its largest magnitude at an
  // interval endpoint; combine per-coordinate maxima.
  double s = 0.0;
  for (std::size_t i = 0; i < fn.q.size(); ++i) {
    const double glo = 2.0 * fn.q[i] * box.lower[i] + fn.c[i];
    const double ghi = 2.0 * fn.q[i] * box.upper[i] + fn.c[i];
    const double m = std::max(std::abs(glo), std::abs(ghi));
    s += m * m;
  }
  return std::sqrt(s);
}

}  // namespace dpp
