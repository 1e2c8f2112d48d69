#pragma once

// Batch front-end shared by the C API and the command-line tool.
//
// Config (JSON):
//   {
//     "scenario": "thm2_flat",            // or "inline": {...}, see below
//     "params":   {"R": 1, "n1": 2},
//     "samples":  200, "margin": 0.1, "seed": 0,
//     "tol":      1e-8,                   // equality tolerance
//     "report":   "out.json",             // written by the caller
//     "verbose":  false
//   }
//
// Inline definitions:
//   "inline": {
//     "factors": [ {"builtin": "sphere", "dim": 2, "scale": 1},
//                  {"coords": ["t"], "domain": [[-2, 2]], "margin": 0.1,
//                   "metric": [["1"]]} ],       // or "diagonal": ["1", ...]
//     "phi":  "cosh(f1.t)",                     // joint chart names f<k>.<coord>
//     "phi1": "...", "phi2": "...",             // optional factor-local summands
//     "expect": {"einstein.direct": true},      // default: every check passes
//     "constants": {"lambda_bar": {"value": 5, "tolerance": 1e-6}}
//   }
// With a single factor the chart names are used unprefixed.
//
// Exit codes: 0 all verdicts match, 1 a verdict or constant mismatch,
// 2 configuration or domain error.

#include "confein/catalog.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>

namespace confein {

inline constexpr int kReportSchemaVersion = 1;
const char* engine_version();

struct RunConfig {
  std::optional<std::string> scenario;
  std::map<std::string, double> params;
  std::optional<nlohmann::json> inline_definition;
  SamplePlan plan;
  Tolerances tol;
  double oracle_tolerance = 1e-9;
  double identity_tolerance = 1e-12;
  std::optional<std::string> report_path;
  bool verbose = false;
};

// Throws Error(Config) on malformed input.
RunConfig parse_run_config(const nlohmann::json& j);

struct RunOutcome {
  int exit_code = 0;
  nlohmann::ordered_json report;  // empty on exit code 2
  std::string summary;            // human-readable, one line per check
  std::string diagnostic;         // set on exit code 2
};

// Never throws for configuration or domain problems; those become exit 2.
RunOutcome run(const RunConfig& config);

// Builds the scenario an inline definition describes; expressions are parsed
// before anything is evaluated.
Scenario scenario_from_inline(const nlohmann::json& j);

// One factor description as above, or {"factors": [...]} for a product.
MetricSpec metric_from_json(const nlohmann::json& j);

nlohmann::ordered_json scenarios_json();
nlohmann::ordered_json report_json(const ResidualReport& r);

// {"metric": ..., "point": [...]} -> curvature at the point. Throws Error.
nlohmann::ordered_json curvature_probe(const nlohmann::json& config);
nlohmann::ordered_json curvature_json(const CurvatureData& d);

}  // namespace confein
