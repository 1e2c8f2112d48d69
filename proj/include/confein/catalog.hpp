#pragma once

// Built-in metrics and the named scenario registry.
//
// Spheres and hyperbolic spaces use iterated rotationally symmetric charts:
//   sphere(k, r):     r^2 (ds1^2 + sin^2 s1 (ds2^2 + sin^2 s2 (...)))
//                     s_i in (0, pi), the last angle in (0, 2 pi)
//   hyperbolic(k, l): l^2 (dt1^2 + sinh^2 t1 g_{S^{k-1}}), t1 in (0, 2),
//                     angles t2.. as for the sphere
//   euclidean(k, a):  a^2 (dx1^2 + ... + dxk^2) on (-1, 1)^k

#include "confein/checkers.hpp"
#include "confein/constructions.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace confein {

enum class MetricKind { Euclidean, Sphere, Hyperbolic };

MetricKind parse_metric_kind(const std::string& name);
const char* to_string(MetricKind kind);

// Throws UnsupportedDim for dim < 1 and BadParameter for scale <= 0.
MetricSpec builtin_metric(MetricKind kind, std::size_t dim, double scale = 1.0);

struct ParamSpec {
  std::string name;
  double default_value = 0.0;
  bool integer = false;
  std::string description;
};

struct ExpectedConstant {
  std::string name;
  double value = 0.0;
  double tolerance = 1e-6;
  bool relative = false;   // |x - v| <= tolerance * max(1, |v|) when set
  std::string provenance;  // "published" or "derived"
};

enum class ScenarioKind {
  ConformalProduct,  // phi on a two-factor product
  Warped,            // g_B + f^2 g_F, also checked through its conformal form
  Twisted,           // g_B + (f1 f2)^2 g_F against its conformal product form
  DoublyTwisted,     // b^2 g_B + f^2 g_F
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::ConformalProduct;
  std::map<std::string, double> parameters;

  // Conformal data; for Warped and Twisted this is the conformal form.
  std::optional<ConformalSpec> conformal;
  // Explicit summands phi = phi1 + phi2 when the scenario defines them.
  std::optional<Expr> phi1;
  std::optional<Expr> phi2;

  std::optional<WarpedSpec> warped;
  std::optional<MetricSpec> twisted;  // the twisted metric itself
  std::optional<DoublyTwistedSpec> doubly_twisted;

  // Check name -> expected verdict, in report order.
  std::vector<std::pair<std::string, bool>> expected;
  std::vector<ExpectedConstant> constants;
  SamplePlan plan;
  std::vector<std::string> notes;
};

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  std::vector<std::pair<std::string, bool>> expected;  // at default parameters
};

// Registry in stable order.
const std::vector<std::string>& scenario_names();
std::vector<ScenarioInfo> list_scenarios();

// Throws UnknownScenario and BadParameter.
Scenario instantiate(const std::string& name, const std::map<std::string, double>& overrides = {});

// Ten conformal pairs spanning flat, round, hyperbolic and product bases.
std::vector<std::pair<std::string, ConformalSpec>> oracle_pairs();

struct SplitInstance {
  std::string name;
  BlockMetricSpec blocks;
  Expr phi;
  bool splits = false;
};

// Factors with and without a sum decomposition of phi.
std::vector<SplitInstance> split_instances();

}  // namespace confein
