#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpp/problem.hpp"
#include "dpp/vec.hpp"

namespace dpp {

/// Multiplier point (w, z) with w >= 0.
struct DualPoint {
  Vec w;
  Vec z;

  Vec concat() const;
  static DualPoint split(const Vec& full, int J, int I);
};

struct DualValue {
  double value = 0.0;
  Vec supergradient;             // (g(y*), sum_omega pi * x*_omega - y*)
  std::vector<Vec> x_minimizers;  // one per state, same order as problem.states
  std::vector<int> x_indices;
  Vec y_minimizer;
};

/// Exact evaluation of the dual function and one supergradient. The y-infimum
/// reuses the auxiliary-step solver at V=1; the per-state x-infimum over the
/// hull is attained at a vertex.
DualValue dual_value(const StochasticProblem& p, const DualPoint& lambda);

struct DualSolveOptions {
  int starts = 16;
  double uniqueness_tol = 1e-3;
  std::uint64_t seed = 1;
  double ascent_step_a = 1.0;   // diminishing schedule a/(1 + k b)
  double ascent_step_b = 0.01;
  int ascent_iterations = 400;
  int polish_iterations = 4000;
  int refine_evaluations = 200000;
  double value_tol = 1e-9;
};

struct DualSolution {
  DualPoint lambda_star;
  double d_star = 0.0;
  double f_opt = 0.0;            // optimal cost estimate (= d* under strong duality)
  double primal_estimate = 0.0;  // independent grid value, cross-check
  double multi_start_spread = 0.0;
  bool unique_flag = false;
  bool converged = true;  // false: still improving at the evaluation cap
  std::vector<DualPoint> endpoints;
  std::vector<double> best_value_history;  // nondecreasing by construction
};

DualSolution solve_dual(const StochasticProblem& p, const DualSolveOptions& opts = {});

/// Brute-force primal oracle for the optimal cost: lattice of per-state
/// simplex weights, zoomed around the incumbent until the effective pitch
/// covers `resolution` subdivisions with margin. Throws if no lattice point
/// is feasible within the grid slack. Desk scale: decision dim <= 3.
double primal_grid_opt(const StochasticProblem& p, int resolution);

struct GeometryEstimate {
  enum class Kind { Polyhedral, NonPolyhedral, Undetermined };
  Kind kind = Kind::Undetermined;
  double L_P = 0.0;        // linear decay floor (polyhedral)
  double L_G = 0.0;        // quadratic decay floor near lambda*
  double L_G_prime = 0.0;  // linear decay floor beyond radius S
  double S = 0.0;          // radius where the quadratic model stays accurate
  int sample_count = 0;
};

struct GeometryProbeOptions {
  int random_directions = 48;
  std::vector<double> radii = {0.01, 0.02, 0.05, 0.1, 0.2, 0.4};
  std::uint64_t seed = 99;
};

/// Samples d along rays from lambda* (axes, block-restricted and mixed random
/// directions, staying inside w >= 0) and classifies the local decay as
/// linear or quadratic.
GeometryEstimate probe_geometry(const StochasticProblem& p, const DualSolution& solution,
                                const GeometryProbeOptions& opts = {});

std::string geometry_kind_name(GeometryEstimate::Kind k);

}  // namespace dpp
