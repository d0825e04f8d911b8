#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpp/engine.hpp"
#include "dpp/problem.hpp"
#include "dpp/vec.hpp"

namespace dpp {

/// Running window of decision/auxiliary sums starting at slot t0.
struct AverageWindow {
  std::int64_t t0 = 0;
  std::int64_t T = 0;
  std::vector<KahanSum> sum_x;
  std::vector<KahanSum> sum_y;

  explicit AverageWindow(int dim = 0, std::int64_t start = 0) { reset(dim, start); }
  void reset(int dim, std::int64_t start);
  Vec mean_x() const;
  Vec mean_y() const;
};

void accumulate(AverageWindow& w, const Vec& x, const Vec& y);

struct WindowEvaluation {
  double f_xbar = 0.0;
  Vec g_xbar;
  double f_ybar = 0.0;
  Vec g_ybar;
};

WindowEvaluation evaluate(const AverageWindow& w, const StochasticProblem& p);

/// Restart slots ceil(base^k), deduplicated and strictly increasing; an empty
/// set degenerates to plain averaging over the whole run.
struct StaggerSchedule {
  double base = 2.0;
  std::vector<std::int64_t> restarts_up_to(std::int64_t horizon) const;
};

struct FrameSummary {
  int frame_index = 0;
  std::int64_t t0 = 0;
  std::int64_t T = 0;
  Vec xbar;
  Vec ybar;
  WindowEvaluation eval;
};

/// Runs the engine and restarts the averaging window exactly at the given
/// slots; frames tile the horizon. An empty restart list gives one frame
/// equal to the plain average, bit for bit.
std::vector<FrameSummary> staggered_run(const StochasticProblem& p, const RunConfig& cfg,
                                        const std::vector<std::int64_t>& restarts);
std::vector<FrameSummary> staggered_run(const StochasticProblem& p, const RunConfig& cfg,
                                        const StaggerSchedule& schedule);

std::string frames_to_csv(const std::vector<FrameSummary>& frames, int J);
void write_frames_csv(const std::vector<FrameSummary>& frames, int J, const std::string& path);

}  // namespace dpp
