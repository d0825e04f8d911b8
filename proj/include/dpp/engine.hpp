#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpp/problem.hpp"
#include "dpp/slot_solvers.hpp"
#include "dpp/vec.hpp"

namespace dpp {

/// Virtual queues: W drives the inequality constraints toward feasibility,
/// Z ties the running decision and auxiliary averages together.
struct QueueState {
  Vec W;  // componentwise >= 0 at every slot
  Vec Z;
  std::int64_t t = 0;

  double lyapunov() const { return 0.5 * (norm2(W) + norm2(Z)); }
};

struct SlotRecord {
  std::int64_t t = 0;
  int omega = 0;
  Vec x;
  Vec y;
  Vec W;       // queues entering the slot, Q(t)
  Vec Z;
  Vec W_next;  // queues after the update, Q(t+1)
  Vec Z_next;
  double drift = 0.0;      // L(t+1) - L(t), computed exactly
  double bound_rhs = 0.0;  // C + W.g(y) + Z.(x - y)
};

enum class TraceGranularity { Full, EveryK, Checkpoints };

struct RunConfig {
  double V = 1.0;
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  Vec initial_W;  // defaults to zero
  Vec initial_Z;
  TraceGranularity granularity = TraceGranularity::Full;
  std::int64_t every_k = 1;
};

struct Trace {
  std::vector<SlotRecord> records;
  QueueState final_state;
  Vec sum_x;  // over the whole run
  Vec sum_y;
  std::int64_t horizon = 0;
};

/// Per-slot observer; spans are only valid during the call.
using SlotObserver = std::function<void(const SlotRecord&)>;

class Engine {
 public:
  Engine(const StochasticProblem& problem, RunConfig config);

  /// One slot of the algorithm at state id `omega`: solve both subproblems,
  /// update the queues, and fill `rec`.
  void step(int omega, SlotRecord& rec);

  const QueueState& state() const { return state_; }
  double drift_constant() const { return C_; }

  /// Full run; states drawn i.i.d. from the instance probabilities unless an
  /// explicit stream is supplied. Same seed, same trace.
  Trace run(const std::optional<std::vector<int>>& omega_stream = std::nullopt);

  /// Streaming variant: no records stored, the observer sees every slot.
  void run_streamed(const SlotObserver& observer,
                    const std::optional<std::vector<int>>& omega_stream = std::nullopt);

 private:
  const StochasticProblem& p_;
  RunConfig cfg_;
  QueueState state_;
  double C_ = 0.0;
  Vec gy_;  // scratch
};

std::string trace_to_csv(const Trace& trace);
void write_trace_csv(const Trace& trace, const std::string& path);

/// Minimal reader for the schema above (used by the analyze path and tests).
struct TraceRow {
  std::int64_t t;
  int omega;
  Vec x, y, W, Z;
  double drift, bound_rhs;
};
std::vector<TraceRow> read_trace_csv(const std::string& path, int I, int J);

}  // namespace dpp
