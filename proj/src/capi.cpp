#include "dpp/capi.h"

#include <cstring>
#include <exception>
#include <string>

#include "dpp/averaging.hpp"
#include "dpp/dual.hpp"
#include "dpp/engine.hpp"
#include "dpp/experiment.hpp"
#include "dpp/problem.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const char* what) { g_last_error = what ? what : "unknown error"; }

dpp::StochasticProblem* unwrap(dpp_problem* p) {
  return reinterpret_cast<dpp::StochasticProblem*>(p);
}
const dpp::StochasticProblem* unwrap(const dpp_problem* p) {
  return reinterpret_cast<const dpp::StochasticProblem*>(p);
}

template <typename F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return DPP_OK;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return DPP_ERR_INVALID_ARG;
  } catch (const std::exception& e) {
    set_error(e.what());
    return DPP_ERR_INTERNAL;
  }
}

template <typename F>
dpp_problem* guarded_handle(F&& f) {
  try {
    auto* p = new dpp::StochasticProblem(f());
    g_last_error.clear();
    return reinterpret_cast<dpp_problem*>(p);
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* dpp_last_error(void) { return g_last_error.c_str(); }

dpp_problem* dpp_problem_load_file(const char* path) {
  if (!path) {
    set_error("null path");
    return nullptr;
  }
  return guarded_handle([&] { return dpp::problem_from_file(path); });
}

dpp_problem* dpp_problem_load_string(const char* json_text) {
  if (!json_text) {
    set_error("null json");
    return nullptr;
  }
  return guarded_handle([&] { return dpp::problem_from_json(json_text); });
}

dpp_problem* dpp_problem_builtin(const char* name) {
  if (!name) {
    set_error("null name");
    return nullptr;
  }
  return guarded_handle([&] { return dpp::builtin_problem(name); });
}

void dpp_problem_free(dpp_problem* p) { delete unwrap(p); }

int dpp_problem_validate(const dpp_problem* p, char* buf, size_t buflen) {
  if (!p) {
    set_error("null problem");
    return -1;
  }
  try {
    const auto violations = dpp::validate(*unwrap(p));
    if (buf && buflen > 0) {
      std::string joined;
      for (const auto& v : violations) {
        joined += v;
        joined += '\n';
      }
      const size_t n = std::min(buflen - 1, joined.size());
      std::memcpy(buf, joined.data(), n);
      buf[n] = '\0';
    }
    return static_cast<int>(violations.size());
  } catch (const std::exception& e) {
    set_error(e.what());
    return -1;
  }
}

int dpp_problem_dims(const dpp_problem* p, int32_t* decision_dim, int32_t* constraint_dim,
                     int32_t* n_states) {
  if (!p) {
    set_error("null problem");
    return DPP_ERR_INVALID_ARG;
  }
  const auto* sp = unwrap(p);
  if (decision_dim) *decision_dim = sp->decision_dim();
  if (constraint_dim) *constraint_dim = sp->constraint_dim();
  if (n_states) *n_states = static_cast<int32_t>(sp->states.size());
  return DPP_OK;
}

int dpp_problem_drift_constant(const dpp_problem* p, double* out) {
  if (!p || !out) {
    set_error("null argument");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] { *out = dpp::compute_C(*unwrap(p)); });
}

int dpp_run_to_csv(const dpp_problem* p, const dpp_run_options* opts, const char* trace_csv_path,
                   const char* frames_csv_path) {
  if (!p || !opts) {
    set_error("null argument");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    const auto* sp = unwrap(p);
    dpp::RunConfig cfg;
    cfg.V = opts->V;
    cfg.horizon = opts->horizon;
    cfg.seed = opts->seed;
    if (opts->initial_W) {
      cfg.initial_W.assign(opts->initial_W, opts->initial_W + sp->constraint_dim());
    }
    if (opts->initial_Z) {
      cfg.initial_Z.assign(opts->initial_Z, opts->initial_Z + sp->decision_dim());
    }
    if (opts->trace_every > 1) {
      cfg.granularity = dpp::TraceGranularity::EveryK;
      cfg.every_k = opts->trace_every;
    }
    if (trace_csv_path) {
      dpp::Engine engine(*sp, cfg);
      dpp::write_trace_csv(engine.run(), trace_csv_path);
    }
    if (frames_csv_path) {
      std::vector<dpp::FrameSummary> frames;
      if (opts->stagger_base > 1.0) {
        frames = dpp::staggered_run(*sp, cfg, dpp::StaggerSchedule{opts->stagger_base});
      } else {
        frames = dpp::staggered_run(*sp, cfg, std::vector<int64_t>{});
      }
      dpp::write_frames_csv(frames, sp->constraint_dim(), frames_csv_path);
    }
  });
}

int dpp_dual_report(const dpp_problem* p, int32_t starts, uint64_t seed, double uniqueness_tol,
                    char** out_json) {
  if (!p || !out_json) {
    set_error("null argument");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    dpp::DualSolveOptions o;
    o.starts = starts > 0 ? starts : 16;
    o.seed = seed;
    if (uniqueness_tol > 0) o.uniqueness_tol = uniqueness_tol;
    *out_json = dup_string(dpp::dual_report_json(*unwrap(p), o));
  });
}

void dpp_string_free(char* s) { delete[] s; }

int dpp_cmd_run(const char* spec_json) {
  if (!spec_json) {
    set_error("null spec");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] { dpp::cmd_run(dpp::spec_from_json(spec_json)); });
}

int dpp_cmd_dual(const char* spec_json, char** out_json) {
  if (!spec_json || !out_json) {
    set_error("null argument");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] { *out_json = dup_string(dpp::cmd_dual(dpp::spec_from_json(spec_json))); });
}

int dpp_cmd_analyze(const char* spec_json) {
  if (!spec_json) {
    set_error("null spec");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] { dpp::cmd_analyze(dpp::spec_from_json(spec_json)); });
}

int dpp_cmd_compare(const char* spec_json) {
  if (!spec_json) {
    set_error("null spec");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] { dpp::cmd_compare(dpp::spec_from_json(spec_json)); });
}

int dpp_cmd_sweep(const char* spec_json) {
  if (!spec_json) {
    set_error("null spec");
    return DPP_ERR_INVALID_ARG;
  }
  return guarded([&] { dpp::cmd_sweep(dpp::spec_from_json(spec_json)); });
}

const char* dpp_builtin_names(void) {
  return "sim-linear,sim-quadratic,sim-linear-nonunique,sim-quadratic-nonunique";
}

}  // extern "C"
