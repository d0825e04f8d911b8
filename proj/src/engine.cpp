#include "dpp/engine.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dpp/rng.hpp"

namespace dpp {

Engine::Engine(const StochasticProblem& problem, RunConfig config)
    : p_(problem), cfg_(std::move(config)) {
  const int I = p_.decision_dim();
  const int J = p_.constraint_dim();
  if (cfg_.V <= 0.0) throw std::invalid_argument("V must be positive");
  if (cfg_.horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  state_.W = cfg_.initial_W.empty() ? Vec(J, 0.0) : cfg_.initial_W;
  state_.Z = cfg_.initial_Z.empty() ? Vec(I, 0.0) : cfg_.initial_Z;
  if (static_cast<int>(state_.W.size()) != J || static_cast<int>(state_.Z.size()) != I) {
    throw std::invalid_argument("initial queue dimension mismatch");
  }
  for (double w : state_.W) {
    if (w < 0.0) throw std::invalid_argument("initial W must be nonnegative");
  }
  state_.t = 0;
  C_ = compute_C(p_);
  gy_.resize(J);
}

void Engine::step(int omega, SlotRecord& rec) {
  const int idx = p_.state_index(omega);
  if (idx < 0) throw std::invalid_argument("unknown state id");

  const double L_before = state_.lyapunov();

  const XStepResult xr = x_step(p_.states[idx].points, state_.Z);
  const YStepResult yr = y_step(p_, cfg_.V, state_.W, state_.Z);

  rec.t = state_.t;
  rec.omega = omega;
  rec.x = xr.point;
  rec.y = yr.point;
  rec.W = state_.W;
  rec.Z = state_.Z;

  p_.constraint_values(yr.point, gy_);
  double wg = 0.0;
  for (std::size_t j = 0; j < gy_.size(); ++j) {
    wg += state_.W[j] * gy_[j];
    state_.W[j] = std::max(state_.W[j] + gy_[j], 0.0);
  }
  double zxy = 0.0;
  for (int i = 0; i < p_.decision_dim(); ++i) {
    const double diff = xr.point[i] - yr.point[i];
    zxy += state_.Z[i] * diff;
    state_.Z[i] += diff;
  }
  state_.t += 1;

  rec.W_next = state_.W;
  rec.Z_next = state_.Z;
  rec.drift = state_.lyapunov() - L_before;
  rec.bound_rhs = C_ + wg + zxy;
}

Trace Engine::run(const std::optional<std::vector<int>>& omega_stream) {
  Trace tr;
  tr.horizon = cfg_.horizon;
  const int I = p_.decision_dim();
  std::vector<KahanSum> sum_x(I), sum_y(I);
  const bool keep_all = cfg_.granularity == TraceGranularity::Full;
  const std::int64_t k = cfg_.granularity == TraceGranularity::EveryK ? std::max<std::int64_t>(cfg_.every_k, 1)
                                                                       : 1;
  run_streamed(
      [&](const SlotRecord& rec) {
        for (int i = 0; i < I; ++i) {
          sum_x[i].add(rec.x[i]);
          sum_y[i].add(rec.y[i]);
        }
        if (keep_all || (cfg_.granularity == TraceGranularity::EveryK && rec.t % k == 0)) {
          tr.records.push_back(rec);
        }
      },
      omega_stream);
  tr.final_state = state_;
  tr.sum_x.resize(I);
  tr.sum_y.resize(I);
  for (int i = 0; i < I; ++i) {
    tr.sum_x[i] = sum_x[i].sum;
    tr.sum_y[i] = sum_y[i].sum;
  }
  return tr;
}

void Engine::run_streamed(const SlotObserver& observer,
                          const std::optional<std::vector<int>>& omega_stream) {
  if (omega_stream && static_cast<std::int64_t>(omega_stream->size()) < cfg_.horizon) {
    throw std::invalid_argument("omega stream shorter than horizon");
  }
  std::vector<double> probs;
  std::vector<int> ids;
  for (const auto& s : p_.states) {
    probs.push_back(s.prob);
    ids.push_back(s.id);
  }
  StateSampler sampler(probs, cfg_.seed);

  SlotRecord rec;
  for (std::int64_t t = 0; t < cfg_.horizon; ++t) {
    const int omega = omega_stream ? (*omega_stream)[t] : ids[sampler.sample(t)];
    step(omega, rec);
    observer(rec);
  }
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  std::string out;
  if (trace.records.empty()) {
    out = "t,omega\n";
    return out;
  }
  const int I = static_cast<int>(trace.records[0].x.size());
  const int J = static_cast<int>(trace.records[0].W.size());
  out = "t,omega";
  for (int i = 1; i <= I; ++i) out += ",x_" + std::to_string(i);
  for (int i = 1; i <= I; ++i) out += ",y_" + std::to_string(i);
  for (int j = 1; j <= J; ++j) out += ",W_" + std::to_string(j);
  for (int i = 1; i <= I; ++i) out += ",Z_" + std::to_string(i);
  out += ",drift,bound_rhs\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.omega);
    for (const auto* vec : {&r.x, &r.y, &r.W, &r.Z}) {
      for (double v : *vec) {
        out += ',';
        append_double(out, v);
      }
    }
    out += ',';
    append_double(out, r.drift);
    out += ',';
    append_double(out, r.bound_rhs);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << trace_to_csv(trace);
}

std::vector<TraceRow> read_trace_csv(const std::string& path, int I, int J) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace: " + path);
  std::string line;
  std::getline(f, line);  // header
  std::vector<TraceRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    auto next = [&]() -> double {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("short trace row");
      return std::stod(cell);
    };
    TraceRow r;
    r.t = static_cast<std::int64_t>(next());
    r.omega = static_cast<int>(next());
    r.x.resize(I);
    r.y.resize(I);
    r.W.resize(J);
    r.Z.resize(I);
    for (auto* vec : {&r.x, &r.y}) {
      for (double& v : *vec) v = next();
    }
    for (double& v : r.W) v = next();
    for (double& v : r.Z) v = next();
    r.drift = next();
    r.bound_rhs = next();
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace dpp
