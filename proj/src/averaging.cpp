#include "dpp/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dpp {

void AverageWindow::reset(int dim, std::int64_t start) {
  t0 = start;
  T = 0;
  sum_x.assign(dim, KahanSum{});
  sum_y.assign(dim, KahanSum{});
}

Vec AverageWindow::mean_x() const {
  Vec m(sum_x.size());
  for (std::size_t i = 0; i < sum_x.size(); ++i) m[i] = sum_x[i].sum / static_cast<double>(T);
  return m;
}

Vec AverageWindow::mean_y() const {
  Vec m(sum_y.size());
  for (std::size_t i = 0; i < sum_y.size(); ++i) m[i] = sum_y[i].sum / static_cast<double>(T);
  return m;
}

void accumulate(AverageWindow& w, const Vec& x, const Vec& y) {
  for (std::size_t i = 0; i < w.sum_x.size(); ++i) {
    w.sum_x[i].add(x[i]);
    w.sum_y[i].add(y[i]);
  }
  w.T += 1;
}

WindowEvaluation evaluate(const AverageWindow& w, const StochasticProblem& p) {
  if (w.T < 1) throw std::invalid_argument("empty averaging window");
  WindowEvaluation ev;
  const Vec xb = w.mean_x();
  const Vec yb = w.mean_y();
  ev.f_xbar = p.objective.value(xb);
  ev.f_ybar = p.objective.value(yb);
  p.constraint_values(xb, ev.g_xbar);
  p.constraint_values(yb, ev.g_ybar);
  return ev;
}

std::vector<std::int64_t> StaggerSchedule::restarts_up_to(std::int64_t horizon) const {
  std::vector<std::int64_t> out;
  if (base <= 1.0) throw std::invalid_argument("stagger base must exceed 1");
  double v = 1.0;
  std::int64_t prev = 0;
  while (true) {
    const auto r = static_cast<std::int64_t>(std::ceil(v));
    if (r >= horizon) break;
    if (r > prev) {
      out.push_back(r);
      prev = r;
    }
    v *= base;
    if (v > 4.0e18) break;
  }
  return out;
}

std::vector<FrameSummary> staggered_run(const StochasticProblem& p, const RunConfig& cfg,
                                        const StaggerSchedule& schedule) {
  return staggered_run(p, cfg, schedule.restarts_up_to(cfg.horizon));
}

std::vector<FrameSummary> staggered_run(const StochasticProblem& p, const RunConfig& cfg,
                                        const std::vector<std::int64_t>& restarts) {
  std::size_t next = 0;

  std::vector<FrameSummary> frames;
  AverageWindow window(p.decision_dim(), 0);

  auto close_frame = [&]() {
    if (window.T == 0) return;
    FrameSummary fs;
    fs.frame_index = static_cast<int>(frames.size());
    fs.t0 = window.t0;
    fs.T = window.T;
    fs.xbar = window.mean_x();
    fs.ybar = window.mean_y();
    fs.eval = evaluate(window, p);
    frames.push_back(std::move(fs));
  };

  Engine engine(p, cfg);
  engine.run_streamed([&](const SlotRecord& rec) {
    if (next < restarts.size() && rec.t == restarts[next]) {
      close_frame();
      window.reset(p.decision_dim(), rec.t);
      ++next;
    }
    accumulate(window, rec.x, rec.y);
  });
  close_frame();
  return frames;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string frames_to_csv(const std::vector<FrameSummary>& frames, int J) {
  std::string out = "frame_index,t0,T,f_xbar";
  for (int j = 1; j <= J; ++j) out += ",g_" + std::to_string(j) + "_xbar";
  out += ",f_ybar\n";
  for (const auto& f : frames) {
    out += std::to_string(f.frame_index);
    out += ',';
    out += std::to_string(f.t0);
    out += ',';
    out += std::to_string(f.T);
    out += ',';
    append_double(out, f.eval.f_xbar);
    for (int j = 0; j < J; ++j) {
      out += ',';
      append_double(out, f.eval.g_xbar[j]);
    }
    out += ',';
    append_double(out, f.eval.f_ybar);
    out += '\n';
  }
  return out;
}

void write_frames_csv(const std::vector<FrameSummary>& frames, int J, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << frames_to_csv(frames, J);
}

}  // namespace dpp
