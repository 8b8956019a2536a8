#include "gradharm.h"

#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "error.hpp"
#include "experiment.hpp"
#include "harmonize.hpp"

using namespace gradharm;

// Concrete type behind the opaque handle.
struct gh_result {
  HarmonizeResult impl;
};

namespace {

thread_local std::string t_last_error;

gh_status fail(gh_status code, const char* what) {
  t_last_error = what;
  return code;
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs fn, translating exceptions into status codes at the boundary.
template <typename Fn>
gh_status guarded(Fn&& fn) {
  try {
    fn();
    return GH_OK;
  } catch (const DimensionError& e) {
    return fail(GH_ERR_DIMENSION_MISMATCH, e.what());
  } catch (const DegenerateInputError& e) {
    return fail(GH_ERR_DEGENERATE_INPUT, e.what());
  } catch (const ParseError& e) {
    return fail(GH_ERR_PARSE, e.what());
  } catch (const IoError& e) {
    return fail(GH_ERR_IO, e.what());
  } catch (const NumericalError& e) {
    return fail(GH_ERR_NUMERICAL, e.what());
  } catch (const InvalidArgumentError& e) {
    return fail(GH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const Error& e) {
    return fail(GH_ERR_UNKNOWN, e.what());
  } catch (const std::exception& e) {
    return fail(GH_ERR_UNKNOWN, e.what());
  } catch (...) {
    return fail(GH_ERR_UNKNOWN, "unknown error");
  }
}

bool to_method(gh_method_kind kind, MethodKind& out) {
  switch (kind) {
    case GH_METHOD_NONE: out = MethodKind::None; return true;
    case GH_METHOD_GH: out = MethodKind::GH; return true;
    case GH_METHOD_GHPP_WEIGHTED: out = MethodKind::GHppWeighted; return true;
    case GH_METHOD_GHPP_ROTATE: out = MethodKind::GHppRotate; return true;
    case GH_METHOD_FLIP_G1: out = MethodKind::FlipG1; return true;
    case GH_METHOD_FLIP_G2: out = MethodKind::FlipG2; return true;
  }
  return false;
}

gh_status require_pair_args(const double* g1, const double* g2, size_t dim) {
  if (!g1 || !g2) return fail(GH_ERR_INVALID_ARGUMENT, "gradient pointers must not be null");
  if (dim == 0) return fail(GH_ERR_INVALID_ARGUMENT, "dim must be >= 1");
  return GH_OK;
}

GradientPair make_pair(const double* g1, const double* g2, size_t dim) {
  return GradientPair(ParamVector(std::vector<double>(g1, g1 + dim)),
                      ParamVector(std::vector<double>(g2, g2 + dim)));
}

gh_status out_json(char** dst, const nlohmann::ordered_json& j) {
  if (!dst) return GH_OK;
  *dst = dup_string(j.dump());
  if (!*dst) return fail(GH_ERR_UNKNOWN, "out of memory");
  return GH_OK;
}

}  // namespace

extern "C" {

const char* gh_status_name(gh_status status) {
  switch (status) {
    case GH_OK: return "ok";
    case GH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GH_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case GH_ERR_DEGENERATE_INPUT: return "degenerate input";
    case GH_ERR_PARSE: return "parse error";
    case GH_ERR_IO: return "io error";
    case GH_ERR_NUMERICAL: return "numerical error";
    case GH_ERR_UNKNOWN: return "unknown error";
  }
  return "unknown status";
}

const char* gh_last_error(void) { return t_last_error.c_str(); }

void gh_string_free(char* s) { delete[] s; }

gh_status gh_harmonize(gh_method_kind kind, double lambda,
                       const double* g1, const double* g2, size_t dim,
                       gh_result** out_result) {
  if (!out_result) return fail(GH_ERR_INVALID_ARGUMENT, "out_result must not be null");
  *out_result = nullptr;
  if (gh_status s = require_pair_args(g1, g2, dim); s != GH_OK) return s;
  MethodKind mk;
  if (!to_method(kind, mk)) return fail(GH_ERR_INVALID_ARGUMENT, "unknown method kind");
  return guarded([&] {
    HarmonizeResult r = harmonize(HarmonizeMethod{mk, lambda}, make_pair(g1, g2, dim));
    *out_result = new gh_result{std::move(r)};
  });
}

void gh_result_free(gh_result* r) { delete r; }

size_t gh_result_dim(const gh_result* r) { return r ? r->impl.tilde_g1.size() : 0; }

const double* gh_result_tilde_g1(const gh_result* r) {
  return r ? r->impl.tilde_g1.values().data() : nullptr;
}

const double* gh_result_tilde_g2(const gh_result* r) {
  return r ? r->impl.tilde_g2.values().data() : nullptr;
}

const double* gh_result_aggregate(const gh_result* r) {
  return r ? r->impl.aggregate.values().data() : nullptr;
}

namespace {
double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }
}  // namespace

double gh_result_tau1(const gh_result* r) { return r ? r->impl.tau1 : nan_value(); }
double gh_result_tau2(const gh_result* r) { return r ? r->impl.tau2 : nan_value(); }
int gh_result_conflict(const gh_result* r) { return r && r->impl.conflict ? 1 : 0; }
double gh_result_angle_before(const gh_result* r) {
  return r ? r->impl.angle_before : nan_value();
}
double gh_result_angle_after(const gh_result* r) {
  return r ? r->impl.angle_after : nan_value();
}
int gh_result_angle_after_defined(const gh_result* r) {
  return r && r->impl.angle_after_defined ? 1 : 0;
}
double gh_result_deviation_sum(const gh_result* r) {
  return r ? r->impl.deviation_sum : nan_value();
}
int gh_result_degenerate(const gh_result* r) { return r && r->impl.degenerate ? 1 : 0; }

gh_status gh_result_to_json(const gh_result* r, char** dst) {
  if (!r || !dst) return fail(GH_ERR_INVALID_ARGUMENT, "null argument");
  gh_status inner = GH_OK;
  const gh_status s = guarded([&] { inner = out_json(dst, harmonize_result_json(r->impl)); });
  return s != GH_OK ? s : inner;
}

gh_status gh_weights(gh_method_kind kind, double lambda,
                     const double* g1, const double* g2, size_t dim,
                     double* out_tau1, double* out_tau2) {
  if (!out_tau1 || !out_tau2) return fail(GH_ERR_INVALID_ARGUMENT, "null tau outputs");
  if (gh_status s = require_pair_args(g1, g2, dim); s != GH_OK) return s;
  MethodKind mk;
  if (!to_method(kind, mk)) return fail(GH_ERR_INVALID_ARGUMENT, "unknown method kind");
  return guarded([&] {
    const HarmonizeResult r = harmonize(HarmonizeMethod{mk, lambda}, make_pair(g1, g2, dim));
    *out_tau1 = r.tau1;
    *out_tau2 = r.tau2;
  });
}

gh_status gh_detect_conflict(const double* g1, const double* g2, size_t dim,
                             int* out_conflict) {
  if (!out_conflict) return fail(GH_ERR_INVALID_ARGUMENT, "null output");
  if (gh_status s = require_pair_args(g1, g2, dim); s != GH_OK) return s;
  return guarded([&] { *out_conflict = detect_conflict(make_pair(g1, g2, dim)) ? 1 : 0; });
}

gh_status gh_verify_projection_qp(const double* g1, const double* g2, size_t dim,
                              size_t samples, uint64_t seed, int* out_pass) {
  if (!out_pass) return fail(GH_ERR_INVALID_ARGUMENT, "null output");
  if (gh_status s = require_pair_args(g1, g2, dim); s != GH_OK) return s;
  return guarded([&] {
    const bool ok = verify_projection_qp(ParamVector(std::vector<double>(g1, g1 + dim)),
                                     ParamVector(std::vector<double>(g2, g2 + dim)),
                                     samples, seed);
    *out_pass = ok ? 1 : 0;
  });
}

gh_status gh_train_run_file(const char* config_path, int parallel,
                            char** out_summary_json) {
  if (!config_path) return fail(GH_ERR_INVALID_ARGUMENT, "null config path");
  if (out_summary_json) *out_summary_json = nullptr;
  gh_status inner = GH_OK;
  const gh_status s = guarded([&] {
    const RunConfig cfg = parse_run_config(config_path);
    const auto summary = run_experiment(cfg, parallel != 0);
    inner = out_json(out_summary_json, summary);
  });
  return s != GH_OK ? s : inner;
}

gh_status gh_harmonize_pair_file(const char* pair_json_path,
                                 gh_method_kind kind, double lambda,
                                 char** dst) {
  if (!pair_json_path || !dst) return fail(GH_ERR_INVALID_ARGUMENT, "null argument");
  *dst = nullptr;
  MethodKind mk;
  if (!to_method(kind, mk)) return fail(GH_ERR_INVALID_ARGUMENT, "unknown method kind");
  gh_status inner = GH_OK;
  const gh_status s = guarded([&] {
    inner = out_json(dst, harmonize_pair_file(pair_json_path, HarmonizeMethod{mk, lambda}));
  });
  return s != GH_OK ? s : inner;
}

gh_status gh_analyze_trace_file(const char* trace_path, size_t num_bins,
                                int apply_method, double lambda,
                                char** dst) {
  if (!trace_path || !dst) return fail(GH_ERR_INVALID_ARGUMENT, "null argument");
  *dst = nullptr;
  std::optional<HarmonizeMethod> method;
  if (apply_method >= 0) {
    MethodKind mk;
    if (!to_method(static_cast<gh_method_kind>(apply_method), mk)) {
      return fail(GH_ERR_INVALID_ARGUMENT, "unknown method kind");
    }
    method = HarmonizeMethod{mk, lambda};
  }
  gh_status inner = GH_OK;
  const gh_status s = guarded([&] {
    inner = out_json(dst, analyze_trace_file(trace_path, num_bins, method));
  });
  return s != GH_OK ? s : inner;
}

gh_status gh_analyze_trace_csv(const char* trace_path, size_t num_bins,
                               char** dst) {
  if (!trace_path || !dst) return fail(GH_ERR_INVALID_ARGUMENT, "null argument");
  *dst = nullptr;
  gh_status inner = GH_OK;
  const gh_status s = guarded([&] {
    const GradientTrace trace = load_trace(trace_path);
    if (trace.entries.empty()) throw ParseError("trace is empty");
    const std::string csv = histogram_csv(histogram(trace, num_bins));
    char* out = dup_string(csv);
    if (!out) {
      inner = fail(GH_ERR_UNKNOWN, "out of memory");
      return;
    }
    *dst = out;
  });
  return s != GH_OK ? s : inner;
}

}  // extern "C"
