#include "confein/errors.hpp"
#include "confein/runner.hpp"

#include <gtest/gtest.h>

using namespace confein;
using nlohmann::json;

namespace {

RunOutcome run_json(const json& j) {
  try {
    return run(parse_run_config(j));
  } catch (const Error& e) {
    RunOutcome r;
    r.exit_code = 2;
    r.diagnostic = e.what();
    return r;
  }
}

void expect_tolerances(const nlohmann::ordered_json& j, const std::string& path) {
  if (j.is_object()) {
    if (j.contains("sup_residual")) {
      EXPECT_TRUE(j["tolerance"].is_number()) << path;
    }
    for (const auto& [k, v] : j.items()) expect_tolerances(v, path + "/" + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) expect_tolerances(j[i], path + "/" + std::to_string(i));
  }
}

const json kFlatInline = {
    {"factors", {{{"builtin", "euclidean"}, {"dim", 2}}, {{"builtin", "euclidean"}, {"dim", 2}}}},
    {"phi", "0.5*(f0.x1^2 + f0.x2^2 + f1.x1^2 + f1.x2^2 + 1)"},
    {"phi1", "0.5*(x1^2 + x2^2 + 0.5)"},
    {"phi2", "0.5*(x1^2 + x2^2 + 0.5)"}};

}  // namespace

TEST(Run, Thm2FlatReportsLambdaBar) {
  const RunOutcome r = run_json({{"scenario", "thm2_flat"}, {"params", {{"R", 1}}}, {"samples", 200}});
  ASSERT_EQ(r.exit_code, 0) << r.summary;
  const auto& lb = r.report["constants"]["lambda_bar"];
  EXPECT_NEAR(lb["value"].get<double>(), 3.0, 1e-6);
  EXPECT_EQ(lb["provenance"], "derived");
  EXPECT_EQ(r.report["constants"]["b_bar"]["provenance"], "published");
  EXPECT_EQ(r.report["sample_plan"]["count"], 200);
  EXPECT_EQ(r.report["sample_plan"]["rule"], "halton");
  EXPECT_EQ(r.report["engine_version"], engine_version());
  EXPECT_EQ(r.report["verdict"], "match");
}

TEST(Run, ExpectedFailureScenarioExitsZero) {
  const RunOutcome r = run_json({{"scenario", "non_splitting"}});
  EXPECT_EQ(r.exit_code, 0);
  for (const auto& c : r.report["checks"]) {
    if (c["name"] == "mixed_ricci_flat") {
      EXPECT_EQ(c["verdict"], "fail");
    }
  }
}

TEST(Run, UnknownScenarioExitsTwo) {
  const RunOutcome r = run_json({{"scenario", "unknown_name"}});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.diagnostic.find("UnknownScenario"), std::string::npos);
  EXPECT_TRUE(r.report.is_null());
}

TEST(Run, BadParameterExitsTwo) {
  EXPECT_EQ(run_json({{"scenario", "thm2_flat"}, {"params", {{"R", -1}}}}).exit_code, 2);
}

TEST(Run, EveryResidualCarriesItsTolerance) {
  for (const char* name : {"thm2_flat", "mo_cylinder", "twisted_split", "doubly_twisted_einstein"}) {
    const RunOutcome r = run_json({{"scenario", name}});
    expect_tolerances(r.report, name);
    for (const auto& [k, c] : r.report["constants"].items()) {
      if (c["provenance"] != "computed") {
        EXPECT_TRUE(c["tolerance"].is_number()) << k;
      }
    }
    EXPECT_TRUE(r.report["tolerances"]["equality"].is_number());
  }
}

TEST(Run, DeterministicApartFromTimestamp) {
  const json cfg = {{"scenario", "sphere_hyperbolic"}, {"params", {{"b", 0.3}}}, {"seed", 5}};
  auto a = run_json(cfg).report;
  auto b = run_json(cfg).report;
  ASSERT_TRUE(a.contains("generated_at"));
  a.erase("generated_at");
  b.erase("generated_at");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Run, StricterToleranceCanFlipVerdicts) {
  const RunOutcome r = run_json({{"scenario", "mo_cylinder"}, {"tol", 1e-20}});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.report["verdict"], "mismatch");
}

TEST(Inline, PassingDefinition) {
  const RunOutcome r = run_json({{"inline", kFlatInline}});
  EXPECT_EQ(r.exit_code, 0) << r.summary << r.diagnostic;
  EXPECT_EQ(r.report["scenario"], "inline");
}

TEST(Inline, SyntaxErrorExitsTwoBeforeEvaluation) {
  json def = kFlatInline;
  def["phi"] = "0.5*(f0.x1^2 + ";
  const RunOutcome r = run_json({{"inline", def}});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.diagnostic.find("Syntax"), std::string::npos);
  def["phi"] = "f2.x1";
  EXPECT_EQ(run_json({{"inline", def}}).exit_code, 2);
}

TEST(Inline, WrongExpectationExitsOne) {
  json def = kFlatInline;
  def["expect"] = {{"einstein.direct", false}};
  EXPECT_EQ(run_json({{"inline", def}}).exit_code, 1);
  def["expect"] = {{"no_such_check", true}};
  EXPECT_EQ(run_json({{"inline", def}}).exit_code, 2);
}

TEST(Inline, SuppliedConstant) {
  json def = kFlatInline;
  def["constants"] = {{"lambda_bar", {{"value", 3.0}}}};
  EXPECT_EQ(run_json({{"inline", def}}).exit_code, 0);
  def["constants"] = {{"lambda_bar", {{"value", 4.0}}}};
  EXPECT_EQ(run_json({{"inline", def}}).exit_code, 1);
}

TEST(Inline, SingleFactorCustomChart) {
  const json def = {{"factors", {{{"coords", {"u", "v"}},
                                  {"domain", {{-1, 1}, {-1, 1}}},
                                  {"diagonal", {"1", "1"}}}}},
                    {"phi", "0.5*(u^2 + v^2 + 1)"},
                    {"expect", {{"einstein.direct", true}}}};
  const RunOutcome r = run_json({{"inline", def}});
  EXPECT_EQ(r.exit_code, 0) << r.diagnostic;
  EXPECT_NEAR(r.report["constants"]["lambda_bar"]["value"].get<double>(), 1.0, 1e-8);
}

TEST(Config, RejectsUnknownKeysAndBadShapes) {
  EXPECT_THROW(parse_run_config({{"scenario", "thm2_flat"}, {"sampels", 3}}), Error);
  EXPECT_THROW(parse_run_config(json::object()), Error);
  EXPECT_THROW(parse_run_config({{"scenario", "thm2_flat"}, {"inline", kFlatInline}}), Error);
  EXPECT_THROW(parse_run_config({{"scenario", "thm2_flat"}, {"samples", -1}}), Error);
  EXPECT_THROW(parse_run_config({{"scenario", 3}}), Error);
  const RunConfig c = parse_run_config({{"scenario", "x"}, {"samples", 17}, {"margin", 0.2}, {"seed", 3},
                                        {"tol", 1e-7}, {"constancy_tol", 1e-5}});
  EXPECT_EQ(c.plan.count, 17u);
  EXPECT_EQ(*c.plan.margin, 0.2);
  EXPECT_EQ(c.plan.seed, 3u);
  EXPECT_EQ(c.tol.equality, 1e-7);
  EXPECT_EQ(c.tol.constancy, 1e-5);
}

TEST(Probe, Examples) {
  const auto flat = curvature_probe({{"metric", {{"builtin", "euclidean"}, {"dim", 3}}}, {"point", {0, 0, 0}}});
  EXPECT_EQ(flat["scalar"].get<double>(), 0.0);
  for (const auto& row : flat["ricci"])
    for (const auto& v : row) EXPECT_EQ(v.get<double>(), 0.0);
  const auto s2 = curvature_probe({{"metric", {{"builtin", "sphere"}, {"dim", 2}}}, {"point", {1.0, 2.0}}});
  EXPECT_NEAR(s2["scalar"].get<double>(), 2.0, 1e-12);
  EXPECT_THROW(curvature_probe({{"metric", {{"builtin", "sphere"}, {"dim", 2}}}, {"point", {5.0, 2.0}}}), Error);
  EXPECT_THROW(curvature_probe({{"metric", {{"builtin", "sphere"}, {"dim", 2}}}, {"point", {1.0}}}), Error);
}

TEST(Probe, ProductMetric) {
  const json m = {{"factors", {{{"builtin", "sphere"}, {"dim", 2}}, {{"builtin", "hyperbolic"}, {"dim", 2}}}}};
  const auto r = curvature_probe({{"metric", m}, {"point", {1.0, 1.0, 1.0, 1.0}}});
  EXPECT_NEAR(r["scalar"].get<double>(), 0.0, 1e-12);
}
