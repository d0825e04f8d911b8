#include "dpp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dpp {

using nlohmann::json;

bool Box::contains(const Vec& x, double slack) const {
  for (int i = 0; i < dim(); ++i) {
    if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
  }
  return true;
}

Vec Box::clamp(Vec x) const {
  for (int i = 0; i < dim(); ++i) x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
  return x;
}

Vec Box::corner(unsigned mask) const {
  Vec y(dim());
  for (int i = 0; i < dim(); ++i) y[i] = (mask >> i) & 1u ? upper[i] : lower[i];
  return y;
}

int StochasticProblem::state_index(int id) const {
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].id == id) return static_cast<int>(k);
  }
  return -1;
}

void StochasticProblem::constraint_values(const Vec& y, Vec& out) const {
  out.resize(constraints.size());
  for (std::size_t j = 0; j < constraints.size(); ++j) out[j] = constraints[j].value(y);
}

std::vector<Vec> StochasticProblem::all_points() const {
  std::vector<Vec> pts;
  for (const auto& s : states) pts.insert(pts.end(), s.points.begin(), s.points.end());
  return pts;
}

Box StochasticProblem::bounding_box() const {
  Box b;
  const int n = decision_dim() > 0 ? decision_dim()
                                   : (states.empty() || states[0].points.empty()
                                          ? 0
                                          : static_cast<int>(states[0].points[0].size()));
  b.lower.assign(n, 0.0);
  b.upper.assign(n, 0.0);
  bool first = true;
  for (const auto& s : states) {
    for (const auto& p : s.points) {
      for (int i = 0; i < n; ++i) {
        if (first) {
          b.lower[i] = b.upper[i] = p[i];
        } else {
          b.lower[i] = std::min(b.lower[i], p[i]);
          b.upper[i] = std::max(b.upper[i], p[i]);
        }
      }
      first = false;
    }
  }
  return b;
}

std::vector<std::string> validate(const StochasticProblem& p) {
  std::vector<std::string> out;
  std::ostringstream os;

  if (p.states.empty()) out.push_back("no random states");
  const int I = p.decision_dim();
  if (I < 1) out.push_back("decision dimension must be >= 1");

  double total = 0.0;
  for (const auto& s : p.states) {
    if (s.prob < 0.0) {
      os.str("");
      os << "state " << s.id << " has negative probability " << s.prob;
      out.push_back(os.str());
    }
    total += s.prob;
    if (s.points.empty()) {
      os.str("");
      os << "state " << s.id << " has an empty decision set";
      out.push_back(os.str());
    }
    for (const auto& pt : s.points) {
      if (static_cast<int>(pt.size()) != I) {
        os.str("");
        os << "state " << s.id << " has a point of wrong dimension";
        out.push_back(os.str());
      } else if (!p.extended_set.contains(pt, 1e-12)) {
        os.str("");
        os << "state " << s.id << " point outside extended set (point outside Y)";
        out.push_back(os.str());
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    os.str("");
    os << "probabilities sum to " << total;
    out.push_back(os.str());
  }

  for (int i = 0; i < I; ++i) {
    if (p.extended_set.lower[i] > p.extended_set.upper[i]) {
      out.push_back("extended set has lower > upper");
      break;
    }
  }
  if (p.objective.dim() != I) out.push_back("objective dimension mismatch");
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    if (p.constraints[j].dim() != I) {
      os.str("");
      os << "constraint " << j + 1 << " dimension mismatch";
      out.push_back(os.str());
    }
  }
  return out;
}

namespace {

// Range of a separable quadratic over the box, exact per coordinate.
void quadratic_range(const ConvexFn& g, const Box& box, double* lo, double* hi) {
  double mn = g.b, mx = g.b;
  for (int i = 0; i < box.dim(); ++i) {
    double qi, ci;
    g.coordinate_terms(i, &qi, &ci);
    const double l = box.lower[i], u = box.upper[i];
    const double vl = qi * l * l + ci * l;
    const double vu = qi * u * u + ci * u;
    double cmin = std::min(vl, vu), cmax = std::max(vl, vu);
    if (qi > 0.0) {
      const double s = -ci / (2.0 * qi);
      if (s > l && s < u) cmin = std::min(cmin, qi * s * s + ci * s);
    }
    mn += cmin;
    mx += cmax;
  }
  *lo = mn;
  *hi = mx;
}

}  // namespace

double compute_C(const StochasticProblem& p) {
  const auto pts = p.all_points();
  const Box& Y = p.extended_set;

  bool all_affine = true;
  for (const auto& g : p.constraints) {
    if (g.kind != ConvexFn::Kind::Affine) all_affine = false;
  }

  double best = 0.0;
  Vec gy(p.constraint_dim());
  if (all_affine) {
    // ||g(y)||^2 + ||x-y||^2 is convex in y for affine g, so the sup over the
    // box is at a corner; the sup over hull(points) is at a vertex.
    for (unsigned m = 0; m < Y.corner_count(); ++m) {
      const Vec y = Y.corner(m);
      p.constraint_values(y, gy);
      const double gterm = norm2(gy);
      double xterm = 0.0;
      for (const auto& x : pts) {
        double d2 = 0.0;
        for (int i = 0; i < Y.dim(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
        xterm = std::max(xterm, d2);
      }
      best = std::max(best, (gterm + xterm) / 2.0);
    }
    return best;
  }

  // Quadratic constraints: bound sup||g||^2 <= sum_j max|g_j|^2 with exact
  // per-constraint ranges, and sup||x-y||^2 by vertex x corner enumeration.
  double gbound = 0.0;
  for (const auto& g : p.constraints) {
    double lo, hi;
    quadratic_range(g, Y, &lo, &hi);
    const double m = std::max(std::abs(lo), std::abs(hi));
    gbound += m * m;
  }
  double xterm = 0.0;
  for (unsigned m = 0; m < Y.corner_count(); ++m) {
    const Vec y = Y.corner(m);
    for (const auto& x : pts) {
      double d2 = 0.0;
      for (int i = 0; i < Y.dim(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
      xterm = std::max(xterm, d2);
    }
  }
  return (gbound + xterm) / 2.0;
}

namespace {

ConvexFn fn_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double b = j.value("b", 0.0);
  if (kind == "affine") {
    return ConvexFn::affine(j.at("a").get<Vec>(), b);
  }
  if (kind == "separable_quadratic") {
    Vec c = j.contains("c") ? j.at("c").get<Vec>() : Vec{};
    return ConvexFn::quadratic(j.at("q").get<Vec>(), std::move(c), b);
  }
  throw std::invalid_argument("unknown function kind: " + kind);
}

json fn_to_json(const ConvexFn& f) {
  json j;
  if (f.kind == ConvexFn::Kind::Affine) {
    j["kind"] = "affine";
    j["a"] = f.a;
  } else {
    j["kind"] = "separable_quadratic";
    j["q"] = f.q;
    j["c"] = f.c;
  }
  j["b"] = f.b;
  return j;
}

}  // namespace

StochasticProblem problem_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  StochasticProblem p;
  for (const auto& js : j.at("states")) {
    RandomState s;
    s.id = js.at("id").get<int>();
    s.prob = js.at("prob").get<double>();
    for (const auto& jp : js.at("points")) s.points.push_back(jp.get<Vec>());
    p.states.push_back(std::move(s));
  }
  p.objective = fn_from_json(j.at("objective"));
  if (j.contains("constraints")) {
    for (const auto& jc : j.at("constraints")) p.constraints.push_back(fn_from_json(jc));
  }
  if (j.contains("extended_set")) {
    p.extended_set.lower = j["extended_set"].at("lower").get<Vec>();
    p.extended_set.upper = j["extended_set"].at("upper").get<Vec>();
  } else {
    p.extended_set = p.bounding_box();
  }
  p.objective.lipschitz_bound = lipschitz_estimate(p.objective, p.extended_set);
  for (auto& g : p.constraints) g.lipschitz_bound = lipschitz_estimate(g, p.extended_set);
  return p;
}

StochasticProblem problem_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return problem_from_json(ss.str());
}

std::string problem_to_json(const StochasticProblem& p) {
  json j;
  j["states"] = json::array();
  for (const auto& s : p.states) {
    json js;
    js["id"] = s.id;
    js["prob"] = s.prob;
    js["points"] = s.points;
    j["states"].push_back(js);
  }
  j["objective"] = fn_to_json(p.objective);
  j["constraints"] = json::array();
  for (const auto& g : p.constraints) j["constraints"].push_back(fn_to_json(g));
  j["extended_set"] = {{"lower", p.extended_set.lower}, {"upper", p.extended_set.upper}};
  return j.dump(2);
}

}  // namespace dpp
