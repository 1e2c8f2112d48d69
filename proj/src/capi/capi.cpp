#include "confein/confein.h"

#include "confein/catalog.hpp"
#include "confein/errors.hpp"
#include "confein/runner.hpp"

#include <cstdlib>
#include <cstring>
#include <new>

struct cfe_expr {
  confein::Expr expr;
  std::vector<std::string> coords;
};

struct cfe_metric {
  confein::MetricSpec metric;
  std::shared_ptr<const confein::CurvatureEngine> engine;
};

namespace {

thread_local std::string last_error;

cfe_status status_of(confein::ErrorCode c) { return static_cast<cfe_status>(static_cast<int>(c) + 1); }

template <class F>
cfe_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return CFE_OK;
  } catch (const confein::Error& e) {
    last_error = std::string(confein::to_string(e.code())) + ": " + e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("ConfigError: ") + e.what();
    return CFE_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CFE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CFE_ERR_INTERNAL;
  }
}

cfe_status invalid(const char* what) {
  last_error = what;
  return CFE_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cfe_metric* wrap(confein::MetricSpec m) {
  auto engine = std::make_shared<const confein::CurvatureEngine>(m);
  return new cfe_metric{std::move(m), std::move(engine)};
}

}  // namespace

extern "C" {

const char* cfe_version(void) { return confein::engine_version(); }

const char* cfe_last_error(void) { return last_error.c_str(); }

void cfe_string_free(char* s) { std::free(s); }

cfe_status cfe_expr_parse(const char* text, const char* const* coords, size_t n_coords,
                          cfe_expr** out) {
  if (!text || !out || (n_coords && !coords)) return invalid("null argument");
  return guarded([&] {
    std::vector<std::string> names;
    for (size_t i = 0; i < n_coords; ++i) {
      if (!coords[i]) throw confein::Error(confein::ErrorCode::Precondition, "null coordinate name");
      names.emplace_back(coords[i]);
    }
    confein::Expr e = confein::parse(text, names);
    *out = new cfe_expr{std::move(e), std::move(names)};
  });
}

cfe_status cfe_expr_evaluate(const cfe_expr* e, const double* point, size_t n, double* out) {
  if (!e || !out || (n && !point)) return invalid("null argument");
  return guarded([&] { *out = confein::evaluate(e->expr, std::span<const double>(point, n)); });
}

cfe_status cfe_expr_differentiate(const cfe_expr* e, size_t coord, cfe_expr** out) {
  if (!e || !out) return invalid("null argument");
  if (coord >= e->coords.size()) return invalid("coordinate index out of range");
  return guarded([&] { *out = new cfe_expr{confein::differentiate(e->expr, coord), e->coords}; });
}

cfe_status cfe_expr_print(const cfe_expr* e, char** out) {
  if (!e || !out) return invalid("null argument");
  return guarded([&] { *out = copy_string(confein::print(e->expr)); });
}

void cfe_expr_free(cfe_expr* e) { delete e; }

cfe_status cfe_metric_builtin(const char* kind, size_t dim, double scale, cfe_metric** out) {
  if (!kind || !out) return invalid("null argument");
  return guarded([&] {
    *out = wrap(confein::builtin_metric(confein::parse_metric_kind(kind), dim, scale));
  });
}

cfe_status cfe_metric_from_json(const char* json, cfe_metric** out) {
  if (!json || !out) return invalid("null argument");
  return guarded([&] { *out = wrap(confein::metric_from_json(nlohmann::json::parse(json))); });
}

size_t cfe_metric_dim(const cfe_metric* m) { return m ? m->metric.dim() : 0; }

cfe_status cfe_metric_curvature(const cfe_metric* m, const double* point, size_t n,
                                double* scalar_out, double* ricci_out) {
  if (!m || !point) return invalid("null argument");
  if (n != m->metric.dim()) return invalid("point dimension does not match the metric");
  return guarded([&] {
    const confein::CurvatureData d = m->engine->curvature(std::span<const double>(point, n));
    if (scalar_out) *scalar_out = d.scalar;
    if (ricci_out) {
      for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
          ricci_out[i * n + j] = d.ricci(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
  });
}

cfe_status cfe_metric_probe_json(const cfe_metric* m, const double* point, size_t n, char** out) {
  if (!m || !point || !out) return invalid("null argument");
  if (n != m->metric.dim()) return invalid("point dimension does not match the metric");
  return guarded([&] {
    const auto d = m->engine->curvature(std::span<const double>(point, n));
    *out = copy_string(confein::curvature_json(d).dump(2));
  });
}

void cfe_metric_free(cfe_metric* m) { delete m; }

cfe_status cfe_list_scenarios_json(char** out) {
  if (!out) return invalid("null argument");
  return guarded([&] { *out = copy_string(confein::scenarios_json().dump(2)); });
}

cfe_status cfe_run_json(const char* config, char** report_out, char** summary_out, int* exit_code) {
  if (!config || !exit_code) return invalid("null argument");
  if (report_out) *report_out = nullptr;
  if (summary_out) *summary_out = nullptr;
  return guarded([&] {
    confein::RunOutcome r;
    try {
      r = confein::run(confein::parse_run_config(nlohmann::json::parse(config)));
    } catch (const confein::Error& e) {
      r.exit_code = 2;
      r.diagnostic = std::string(confein::to_string(e.code())) + ": " + e.what();
    } catch (const nlohmann::json::exception& e) {
      r.exit_code = 2;
      r.diagnostic = std::string("ConfigError: ") + e.what();
    }
    *exit_code = r.exit_code;
    if (r.exit_code == 2) {
      last_error = r.diagnostic;
      if (summary_out) *summary_out = copy_string(r.diagnostic + "\n");
      return;
    }
    if (report_out) *report_out = copy_string(r.report.dump(2));
    if (summary_out) *summary_out = copy_string(r.summary);
  });
}

cfe_status cfe_probe_json(const char* config, char** out) {
  if (!config || !out) return invalid("null argument");
  return guarded(
      [&] { *out = copy_string(confein::curvature_probe(nlohmann::json::parse(config)).dump(2)); });
}

}  // extern "C"
