#include "confein/runner.hpp"

#include "confein/errors.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <set>
#include <sstream>

namespace confein {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) config_error(what + " must be a number");
  return j.get<double>();
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

ordered_json point_json(const Point& p) {
  ordered_json a = ordered_json::array();
  for (double v : p) a.push_back(finite_or_null(v));
  return a;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(finite_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Expr entry_expr(const json& j, const Chart& chart) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (j.is_string()) return chart.parse(j.get<std::string>());
  config_error("metric entries must be strings or numbers");
}

std::vector<Interval> domain_from_json(const json& j, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) config_error("domain must list one interval per coordinate");
  std::vector<Interval> out;
  for (const json& iv : j) {
    if (!iv.is_array() || iv.size() != 2) config_error("intervals are [lo, hi] pairs");
    out.push_back({number(iv[0], "interval bound"), number(iv[1], "interval bound")});
  }
  return out;
}

MetricSpec factor_from_json(const json& j) {
  if (j.contains("builtin")) {
    only_keys(j, {"builtin", "dim", "scale", "domain", "margin"}, "builtin factor");
    const double dim = number(j.at("dim"), "dim");
    if (dim != std::floor(dim)) config_error("dim must be an integer");
    if (dim < 1) throw Error(ErrorCode::UnsupportedDim, "built-in metrics need dimension >= 1");
    MetricSpec g = builtin_metric(parse_metric_kind(j.at("builtin").get<std::string>()),
                                  static_cast<std::size_t>(dim),
                                  j.contains("scale") ? number(j["scale"], "scale") : 1.0);
    if (!j.contains("domain") && !j.contains("margin")) return g;
    const std::vector<Interval> domain =
        j.contains("domain") ? domain_from_json(j["domain"], g.dim()) : g.chart().domain();
    const double margin =
        j.contains("margin") ? number(j["margin"], "margin") : g.chart().singular_margin();
    std::vector<Expr> entries;
    for (std::size_t a = 0; a < g.dim(); ++a) {
      for (std::size_t b = 0; b < g.dim(); ++b) entries.push_back(g.entry(a, b));
    }
    return MetricSpec(Chart(g.chart().names(), domain, margin), std::move(entries));
  }

  only_keys(j, {"coords", "domain", "margin", "metric", "diagonal"}, "factor");
  if (!j.contains("coords") || !j["coords"].is_array()) config_error("factor needs a coords array");
  std::vector<std::string> names;
  for (const json& c : j["coords"]) {
    if (!c.is_string()) config_error("coordinate names must be strings");
    names.push_back(c.get<std::string>());
  }
  if (!j.contains("domain")) config_error("factor needs a domain");
  Chart chart(names, domain_from_json(j["domain"], names.size()),
              j.contains("margin") ? number(j["margin"], "margin") : Chart::kDefaultMargin);
  const std::size_t n = chart.dim();
  if (j.contains("diagonal") == j.contains("metric")) {
    config_error("factor needs exactly one of 'metric' and 'diagonal'");
  }
  if (j.contains("diagonal")) {
    const json& d = j["diagonal"];
    if (!d.is_array() || d.size() != n) config_error("diagonal must have one entry per coordinate");
    std::vector<Expr> diag;
    for (const json& e : d) diag.push_back(entry_expr(e, chart));
    return MetricSpec::diagonal(std::move(chart), std::move(diag));
  }
  const json& m = j["metric"];
  if (!m.is_array() || m.size() != n) config_error("metric must be a square matrix");
  std::vector<Expr> entries;
  for (const json& row : m) {
    if (!row.is_array() || row.size() != n) config_error("metric must be a square matrix");
    for (const json& e : row) entries.push_back(entry_expr(e, chart));
  }
  return MetricSpec(std::move(chart), std::move(entries));
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> names = {
      "einstein.direct", "conformally_einstein", "mixed_ricci_flat", "split_factor",
      "dichotomy",        "case1",                "case2",            "lemma2",
      "lemma3",          "oracle.ricci",         "oracle.scalar",    "oracle.connection",
      "twisted_identity", "doubly_twisted_identity", "warped_form"};
  return names;
}

bool is_domain_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConstantSummand:
    case ErrorCode::IllConditionedFit:
    case ErrorCode::FitFailure:
    case ErrorCode::Precondition:
      return false;
    default:
      return true;
  }
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::ConformalProduct: return "conformal_product";
    case ScenarioKind::Warped: return "warped";
    case ScenarioKind::Twisted: return "twisted";
    case ScenarioKind::DoublyTwisted: return "doubly_twisted";
  }
  return "unknown";
}

struct CheckOutcome {
  bool passed = false;
  std::vector<ResidualReport> reports;
  ordered_json extra = ordered_json::object();
};

class Evaluator {
 public:
  Evaluator(const Scenario& s, const RunConfig& cfg) : s_(s), plan_(cfg.plan), cfg_(cfg) {}

  CheckOutcome evaluate(const std::string& name) {
    if (name == "einstein.direct") return einstein_direct();
    if (name == "conformally_einstein") return conformally_einstein();
    if (name == "mixed_ricci_flat") return mixed();
    if (name == "split_factor") return split();
    if (name == "dichotomy") return dichotomy();
    if (name == "case1") return case1();
    if (name == "case2") return case2();
    if (name == "lemma2") return lemma2();
    if (name == "lemma3") return lemma3();
    if (name == "oracle.ricci") return from_report(oracle().ricci);
    if (name == "oracle.scalar") return from_report(oracle().scalar);
    if (name == "oracle.connection") return from_report(oracle().connection);
    if (name == "twisted_identity") {
      return from_report(metric_identity_check(name, need(s_.twisted, name),
                                               conformal_metric(conformal(name), plan_), plan_,
                                               cfg_.identity_tolerance));
    }
    if (name == "doubly_twisted_identity") {
      return from_report(metric_identity_check(
          name, doubly_twisted_metric(need(s_.doubly_twisted, name)),
          conformal_metric(conformal(name), plan_), plan_, cfg_.identity_tolerance));
    }
    if (name == "warped_form") {
      const WarpedFormResult w = warped_form_check(need(s_.doubly_twisted, name), plan_, cfg_.tol);
      return {w.passed,
              {w.base_scale_constant, w.warp_on_base, w.swapped_base_scale, w.swapped_warp_on_base},
              ordered_json::object()};
    }
    config_error("unknown check '" + name + "'");
  }

  const std::vector<std::pair<std::string, double>>& constants() const { return constants_; }

 private:
  template <class T>
  static const T& need(const std::optional<T>& v, const std::string& check) {
    if (!v) config_error("check '" + check + "' does not apply to this scenario");
    return *v;
  }

  const ConformalSpec& conformal(const std::string& check) const { return need(s_.conformal, check); }

  const BlockMetricSpec& blocks(const std::string& check) const {
    const ConformalSpec& c = conformal(check);
    if (!c.blocks || c.blocks->factor_count() < 2) {
      config_error("check '" + check + "' needs a product of factors");
    }
    return *c.blocks;
  }

  const BlockMetricSpec& pair(const std::string& check) const {
    const BlockMetricSpec& b = blocks(check);
    if (b.factor_count() != 2) config_error("check '" + check + "' needs exactly two factors");
    return b;
  }

  std::pair<Expr, Expr> summands(const std::string& check) const {
    return {need(s_.phi1, check), need(s_.phi2, check)};
  }

  void set_constant(const std::string& name, double v) {
    for (auto& [k, old] : constants_) {
      if (k == name) {
        old = v;
        return;
      }
    }
    constants_.emplace_back(name, v);
  }

  bool has_constant(const std::string& name) const {
    return std::any_of(constants_.begin(), constants_.end(),
                       [&](const auto& kv) { return kv.first == name; });
  }

  static CheckOutcome from_report(const ResidualReport& r) {
    return {r.passed, {r}, ordered_json::object()};
  }

  static ordered_json estimate_json(const EinsteinEstimate& e, const Tolerances& tol) {
    ordered_json j;
    j["lambda_hat"] = finite_or_null(e.lambda_hat);
    j["lambda_spread"] = finite_or_null(e.lambda_spread);
    j["spread_tolerance"] = tol.equality * (1.0 + std::abs(e.lambda_hat));
    j["passed"] = e.passed;
    if (!e.notes.empty()) j["notes"] = e.notes;
    return j;
  }

  MetricSpec target_metric() const {
    switch (s_.kind) {
      case ScenarioKind::Warped: return warped_metric(*s_.warped);
      case ScenarioKind::Twisted: return *s_.twisted;
      case ScenarioKind::DoublyTwisted: return doubly_twisted_metric(*s_.doubly_twisted);
      case ScenarioKind::ConformalProduct: break;
    }
    return conformal_metric(conformal("einstein.direct"), plan_);
  }

  CheckOutcome einstein_direct() {
    const EinsteinEstimate e = einstein_check(target_metric(), plan_, cfg_.tol);
    set_constant("lambda_bar", e.lambda_hat);
    const double n = static_cast<double>(target_metric().dim());
    set_constant("rho_bar", e.lambda_hat / (n - 1.0));
    return {e.passed, {e.residual}, estimate_json(e, cfg_.tol)};
  }

  CheckOutcome conformally_einstein() {
    const ConformalEinsteinResult r =
        conformally_einstein_check(conformal("conformally_einstein"), plan_, cfg_.tol);
    ordered_json x;
    x["lambda_bar"] = finite_or_null(r.lambda_bar);
    x["lambda_estimated"] = r.lambda_estimated;
    x["direct"] = estimate_json(r.direct, cfg_.tol);
    x["verdicts_agree"] = r.verdicts_agree;
    return {r.passed, {r.formula}, x};
  }

  CheckOutcome mixed() {
    const MixedRicciResult m =
        mixed_ricci_flat_check(blocks("mixed_ricci_flat"), conformal("mixed_ricci_flat").phi, plan_,
                               cfg_.tol);
    CheckOutcome out{m.passed, {m.hessian}, ordered_json::object()};
    if (m.direct) out.reports.push_back(*m.direct);
    out.extra["route_discrepancy"] = finite_or_null(m.route_discrepancy);
    out.extra["verdicts_agree"] = m.verdicts_agree;
    return out;
  }

  CheckOutcome split() {
    const SplitResult r =
        split_factor(pair("split_factor"), conformal("split_factor").phi, std::nullopt, plan_, cfg_.tol);
    ordered_json x;
    x["anchor"] = point_json(r.anchor);
    x["probe"] = point_json(r.probe);
    x["phi1"] = print(r.phi1);
    x["phi2"] = print(r.phi2);
    return {r.residual.passed, {r.residual}, x};
  }

  CheckOutcome dichotomy() {
    const DichotomyResult t =
        dichotomy_check(pair("dichotomy"), conformal("dichotomy").phi, plan_, cfg_.tol);
    CheckOutcome out{t.passed, {t.mixed.hessian}, ordered_json::object()};
    if (t.split) out.reports.push_back(t.split->residual);
    if (t.case1) {
      for (const auto& r : t.case1->checks) out.reports.push_back(r);
    }
    if (t.case2) {
      for (const auto& r : t.case2->checks) out.reports.push_back(r);
    }
    out.extra["route"] = t.route;
    out.extra["direct"] = estimate_json(t.direct, cfg_.tol);
    out.extra["verdicts_agree"] = t.verdicts_agree;
    return out;
  }

  CheckOutcome case1() {
    const Case1Result c = case1_check(need(s_.warped, "case1"), plan_, cfg_.tol);
    set_constant("lambda_fiber", c.lambda_fiber);
    if (!has_constant("lambda_bar")) set_constant("lambda_bar", c.lambda_bar);
    ordered_json x;
    x["lambda_fiber"] = finite_or_null(c.lambda_fiber);
    x["lambda_bar"] = finite_or_null(c.lambda_bar);
    x["direct"] = estimate_json(c.direct, cfg_.tol);
    x["verdicts_agree"] = c.verdicts_agree;
    return {c.passed, c.checks, x};
  }

  void lemma2_constants(const Lemma2Fit& l) {
    if (l.status != Lemma2Fit::Status::Ok) return;
    set_constant("a1", l.a1);
    set_constant("b1", l.b1);
    set_constant("c1", l.c1);
    set_constant("a2", l.a2);
    set_constant("b2", l.b2);
    set_constant("c2", l.c2);
    set_constant("s", l.s);
    set_constant("s_bar", l.s_bar);
  }

  CheckOutcome case2() {
    const BlockMetricSpec& b = pair("case2");
    const auto [phi1, phi2] = summands("case2");
    const Case2Result r = case2_check(b.factor(0), b.factor(1), phi1, phi2, plan_, cfg_.tol);
    const Case2Constants& k = r.constants;
    set_constant("a_bar", k.a_bar);
    set_constant("b_bar", k.b_bar);
    set_constant("c_bar_1", k.c_bar_1);
    set_constant("c_bar_2", k.c_bar_2);
    set_constant("lambda_1", k.lambda_1);
    set_constant("lambda_2", k.lambda_2);
    set_constant("c_bar_sum_unsigned", k.c_bar_sum_unsigned);
    if (r.lemma2) {
      lemma2_constants(*r.lemma2);
      set_constant("c_sum_lemma2", k.c_sum_lemma2);
    }
    ordered_json x;
    x["rho_bar_direct"] = finite_or_null(k.rho_bar);
    x["direct"] = estimate_json(r.direct, cfg_.tol);
    x["verdicts_agree"] = r.verdicts_agree;
    x["notes"] = r.notes;
    return {r.passed, r.checks, x};
  }

  CheckOutcome lemma2() {
    const BlockMetricSpec& b = pair("lemma2");
    const auto [phi1, phi2] = summands("lemma2");
    Lemma2Fit l;
    try {
      l = lemma2_fit(b.factor(0), b.factor(1), phi1, phi2, plan_, cfg_.tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Precondition) throw;
      CheckOutcome out;
      out.extra["error"] = e.what();
      return out;
    }
    lemma2_constants(l);
    ordered_json x;
    x["status"] = l.status == Lemma2Fit::Status::Ok ? "ok" : "constant_summand";
    if (l.status != Lemma2Fit::Status::Ok) x["constant_summand"] = l.constant_summand + 1;
    return {l.status == Lemma2Fit::Status::Ok && l.passed, l.checks, x};
  }

  CheckOutcome lemma3() {
    const BlockMetricSpec& b = pair("lemma3");
    const auto [phi1, phi2] = summands("lemma3");
    const Lemma3Result l = lemma3_check(b.factor(0), b.factor(1), phi1, phi2, plan_, cfg_.tol);
    ordered_json x;
    x["lambda_1"] = finite_or_null(l.lambda_1);
    x["lambda_bar"] = finite_or_null(l.lambda_bar);
    return {l.passed, l.checks, x};
  }

  const OracleResult& oracle() {
    if (!oracle_) {
      oracle_ = conformal_oracle_check(conformal("oracle"), plan_, cfg_.oracle_tolerance);
    }
    return *oracle_;
  }

  const Scenario& s_;
  SamplePlan plan_;
  const RunConfig& cfg_;
  std::optional<OracleResult> oracle_;
  std::vector<std::pair<std::string, double>> constants_;
};

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ordered_json plan_json(const SamplePlan& p) {
  ordered_json j;
  j["count"] = p.count;
  j["margin"] = p.margin ? ordered_json(*p.margin) : ordered_json();
  j["rule"] = p.rule;
  j["seed"] = p.seed;
  return j;
}

}  // namespace

const char* engine_version() { return "1.0.0"; }

ordered_json report_json(const ResidualReport& r) {
  ordered_json j;
  j["check_name"] = r.check_name;
  j["sup_residual"] = finite_or_null(r.sup_residual);
  j["mean_residual"] = finite_or_null(r.mean_residual);
  j["tolerance"] = r.tolerance;
  j["passed"] = r.passed;
  j["argmax_point"] = point_json(r.argmax_point);
  if (!r.per_sample.empty()) {
    ordered_json a = ordered_json::array();
    for (double v : r.per_sample) a.push_back(finite_or_null(v));
    j["per_sample"] = std::move(a);
  }
  return j;
}

RunConfig parse_run_config(const json& j) {
  only_keys(j, {"scenario", "inline", "params", "samples", "margin", "seed", "tol", "constancy_tol",
                "report", "verbose"},
            "config");
  RunConfig c;
  if (j.contains("scenario") == j.contains("inline")) {
    config_error("config needs exactly one of 'scenario' and 'inline'");
  }
  if (j.contains("scenario")) {
    if (!j["scenario"].is_string()) config_error("scenario must be a string");
    c.scenario = j["scenario"].get<std::string>();
  } else {
    c.inline_definition = j["inline"];
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) config_error("params must be an object");
    if (c.inline_definition) config_error("params apply to named scenarios only");
    for (const auto& [k, v] : j["params"].items()) c.params[k] = number(v, "parameter " + k);
  }
  if (j.contains("samples")) {
    const double n = number(j["samples"], "samples");
    if (n < 1 || n != std::floor(n)) config_error("samples must be a positive integer");
    c.plan.count = static_cast<std::size_t>(n);
  }
  if (j.contains("margin")) c.plan.margin = number(j["margin"], "margin");
  if (j.contains("seed")) {
    const double s = number(j["seed"], "seed");
    if (s < 0 || s != std::floor(s)) config_error("seed must be a non-negative integer");
    c.plan.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("tol")) {
    c.tol.equality = number(j["tol"], "tol");
    if (!(c.tol.equality > 0)) config_error("tol must be positive");
  }
  if (j.contains("constancy_tol")) {
    c.tol.constancy = number(j["constancy_tol"], "constancy_tol");
    if (!(c.tol.constancy > 0)) config_error("constancy_tol must be positive");
  }
  if (j.contains("report")) {
    if (!j["report"].is_string()) config_error("report must be a path string");
    c.report_path = j["report"].get<std::string>();
  }
  if (j.contains("verbose")) {
    if (!j["verbose"].is_boolean()) config_error("verbose must be a boolean");
    c.verbose = j["verbose"].get<bool>();
  }
  return c;
}

MetricSpec metric_from_json(const json& j) {
  if (!j.is_object()) config_error("metric must be an object");
  if (!j.contains("factors")) return factor_from_json(j);
  only_keys(j, {"factors"}, "metric");
  const json& f = j["factors"];
  if (!f.is_array() || f.empty()) config_error("factors must be a non-empty array");
  if (f.size() == 1) return factor_from_json(f[0]);
  std::vector<MetricSpec> parts;
  for (const json& e : f) parts.push_back(factor_from_json(e));
  return BlockMetricSpec(std::move(parts)).joint();
}

Scenario scenario_from_inline(const json& j) {
  only_keys(j, {"factors", "phi", "phi1", "phi2", "expect", "constants"}, "inline");
  if (!j.contains("factors") || !j["factors"].is_array() || j["factors"].empty()) {
    config_error("inline needs a non-empty factors array");
  }
  if (!j.contains("phi") || !j["phi"].is_string()) config_error("inline needs phi as a string");

  Scenario s;
  s.name = "inline";
  s.kind = ScenarioKind::ConformalProduct;
  const json& f = j["factors"];
  std::vector<MetricSpec> factors;
  for (const json& e : f) factors.push_back(factor_from_json(e));

  if (j.contains("phi1") != j.contains("phi2")) config_error("phi1 and phi2 go together");
  if (factors.size() == 1) {
    if (j.contains("phi1")) config_error("phi1/phi2 need two factors");
    const Expr phi = factors[0].chart().parse(j["phi"].get<std::string>());
    s.conformal = ConformalSpec(factors[0], phi);
    s.expected = {{"einstein.direct", true}, {"conformally_einstein", true},
                  {"oracle.ricci", true},    {"oracle.scalar", true},
                  {"oracle.connection", true}};
  } else {
    BlockMetricSpec blocks(factors);
    const Expr phi = blocks.joint().chart().parse(j["phi"].get<std::string>());
    if (j.contains("phi1")) {
      if (factors.size() != 2) config_error("phi1/phi2 need exactly two factors");
      s.phi1 = factors[0].chart().parse(j["phi1"].get<std::string>());
      s.phi2 = factors[1].chart().parse(j["phi2"].get<std::string>());
    }
    s.conformal = ConformalSpec(std::move(blocks), phi);
    s.expected = {{"einstein.direct", true}, {"conformally_einstein", true},
                  {"mixed_ricci_flat", true}};
    if (factors.size() == 2) {
      s.expected.push_back({"split_factor", true});
      s.expected.push_back({"dichotomy", true});
      if (s.phi1) {
        s.expected.push_back({"case2", true});
        s.expected.push_back({"lemma2", true});
        s.expected.push_back({"lemma3", true});
      }
    }
    s.expected.push_back({"oracle.ricci", true});
    s.expected.push_back({"oracle.scalar", true});
    s.expected.push_back({"oracle.connection", true});
  }

  if (j.contains("expect")) {
    const json& e = j["expect"];
    if (!e.is_object()) config_error("expect must be an object of check -> bool");
    std::vector<std::pair<std::string, bool>> chosen;
    for (const auto& [name, v] : e.items()) {
      if (!known_checks().count(name)) config_error("unknown check '" + name + "'");
      if (!v.is_boolean()) config_error("expectation for '" + name + "' must be a boolean");
      chosen.emplace_back(name, v.get<bool>());
    }
    s.expected = std::move(chosen);
  }
  if (j.contains("constants")) {
    const json& c = j["constants"];
    if (!c.is_object()) config_error("constants must be an object");
    for (const auto& [name, v] : c.items()) {
      only_keys(v, {"value", "tolerance", "relative"}, "constant " + name);
      ExpectedConstant k;
      k.name = name;
      k.value = number(v.at("value"), name + ".value");
      if (v.contains("tolerance")) k.tolerance = number(v["tolerance"], name + ".tolerance");
      if (v.contains("relative")) k.relative = v["relative"].get<bool>();
      k.provenance = "supplied";
      s.constants.push_back(std::move(k));
    }
  }
  s.notes.push_back("inline definition");
  return s;
}

RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  try {
    if (cfg.inline_definition && !cfg.params.empty()) config_error("params apply to named scenarios only");
    const Scenario s = cfg.scenario ? instantiate(*cfg.scenario, cfg.params)
                                    : scenario_from_inline(*cfg.inline_definition);
    Evaluator ev(s, cfg);
    std::ostringstream summary;
    bool all_match = true;

    ordered_json checks = ordered_json::array();
    for (const auto& [name, expected] : s.expected) {
      CheckOutcome o;
      std::optional<std::string> error;
      try {
        o = ev.evaluate(name);
      } catch (const Error& e) {
        if (is_domain_error(e.code())) throw;
        error = std::string(to_string(e.code())) + ": " + e.what();
        o.passed = false;
      }
      const bool matches = o.passed == expected;
      all_match = all_match && matches;

      ordered_json c;
      c["name"] = name;
      c["expected"] = expected ? "pass" : "fail";
      c["verdict"] = o.passed ? "pass" : "fail";
      c["matches"] = matches;
      ordered_json reports = ordered_json::array();
      for (const ResidualReport& r : o.reports) reports.push_back(report_json(r));
      c["reports"] = std::move(reports);
      for (auto& [k, v] : o.extra.items()) c[k] = v;
      if (error) c["error"] = *error;
      checks.push_back(std::move(c));

      summary << (matches ? "ok    " : "MISMATCH ") << name << ": " << (o.passed ? "pass" : "fail")
              << " (expected " << (expected ? "pass" : "fail") << ")";
      if (!o.reports.empty()) {
        double sup = 0.0;
        for (const auto& r : o.reports) sup = std::max(sup, r.sup_residual);
        summary << " sup " << format_double(sup);
      }
      if (error) summary << " [" << *error << "]";
      summary << '\n';
      if (cfg.verbose) {
        for (const auto& r : o.reports) {
          summary << "        " << r.check_name << " sup " << format_double(r.sup_residual)
                  << " mean " << format_double(r.mean_residual) << " tol "
                  << format_double(r.tolerance) << (r.passed ? " pass" : " fail") << '\n';
        }
      }
    }

    ordered_json constants = ordered_json::object();
    auto computed = [&](const std::string& name) -> std::optional<double> {
      for (const auto& [k, v] : ev.constants()) {
        if (k == name) return v;
      }
      return std::nullopt;
    };
    for (const ExpectedConstant& k : s.constants) {
      const std::optional<double> v = computed(k.name);
      const double scale = k.relative ? std::max(1.0, std::abs(k.value)) : 1.0;
      const bool ok = v && std::abs(*v - k.value) <= k.tolerance * scale;
      all_match = all_match && ok;
      ordered_json c;
      c["value"] = v ? finite_or_null(*v) : ordered_json();
      c["expected"] = k.value;
      c["tolerance"] = k.tolerance;
      c["relative"] = k.relative;
      c["provenance"] = k.provenance;
      c["matches"] = ok;
      constants[k.name] = std::move(c);
      summary << (ok ? "ok    " : "MISMATCH ") << "constant " << k.name << " = "
              << (v ? format_double(*v) : std::string("n/a")) << " (expected "
              << format_double(k.value) << ")\n";
    }
    for (const auto& [name, v] : ev.constants()) {
      if (constants.contains(name)) continue;
      ordered_json c;
      c["value"] = finite_or_null(v);
      c["expected"] = nullptr;
      c["tolerance"] = nullptr;
      c["provenance"] = "computed";
      constants[name] = std::move(c);
    }

    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : s.parameters) params[k] = finite_or_null(v);
    ordered_json tol;
    tol["equality"] = cfg.tol.equality;
    tol["constancy"] = cfg.tol.constancy;
    tol["oracle"] = cfg.oracle_tolerance;
    tol["identity"] = cfg.identity_tolerance;
    tol["constant_summand_spread"] = kConstantSummandSpread;

    ordered_json& r = out.report;
    r["schema_version"] = kReportSchemaVersion;
    r["engine_version"] = engine_version();
    r["generated_at"] = timestamp();
    r["scenario"] = s.name;
    r["kind"] = kind_name(s.kind);
    r["parameters"] = std::move(params);
    r["sample_plan"] = plan_json(cfg.plan);
    r["tolerances"] = std::move(tol);
    r["checks"] = std::move(checks);
    r["constants"] = std::move(constants);
    r["notes"] = s.notes;
    r["verdict"] = all_match ? "match" : "mismatch";
    out.exit_code = all_match ? 0 : 1;
    out.summary = summary.str();
  } catch (const Error& e) {
    out = RunOutcome{};
    out.exit_code = 2;
    out.diagnostic = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const json::exception& e) {
    out = RunOutcome{};
    out.exit_code = 2;
    out.diagnostic = std::string("ConfigError: ") + e.what();
  } catch (const std::exception& e) {
    out = RunOutcome{};
    out.exit_code = 2;
    out.diagnostic = std::string("error: ") + e.what();
  }
  return out;
}

ordered_json scenarios_json() {
  ordered_json out = ordered_json::array();
  for (const ScenarioInfo& info : list_scenarios()) {
    ordered_json s;
    s["name"] = info.name;
    s["summary"] = info.summary;
    ordered_json params = ordered_json::array();
    for (const ParamSpec& p : info.params) {
      ordered_json pj;
      pj["name"] = p.name;
      pj["default"] = finite_or_null(p.default_value);
      pj["integer"] = p.integer;
      pj["description"] = p.description;
      params.push_back(std::move(pj));
    }
    s["params"] = std::move(params);
    ordered_json expected = ordered_json::object();
    for (const auto& [name, pass] : info.expected) expected[name] = pass ? "pass" : "fail";
    s["expected"] = std::move(expected);
    out.push_back(std::move(s));
  }
  return out;
}

ordered_json curvature_json(const CurvatureData& d) {
  const std::size_t n = d.christoffel.dim();
  ordered_json j;
  j["dim"] = n;
  j["point"] = point_json(d.point);
  j["metric"] = matrix_json(d.metric);
  j["inverse_metric"] = matrix_json(d.inverse_metric);
  ordered_json gamma = ordered_json::array();
  for (std::size_t k = 0; k < n; ++k) {
    ordered_json m = ordered_json::array();
    for (std::size_t i = 0; i < n; ++i) {
      ordered_json row = ordered_json::array();
      for (std::size_t l = 0; l < n; ++l) row.push_back(finite_or_null(d.christoffel(k, i, l)));
      m.push_back(std::move(row));
    }
    gamma.push_back(std::move(m));
  }
  j["christoffel"] = std::move(gamma);
  j["ricci"] = matrix_json(d.ricci);
  j["scalar"] = finite_or_null(d.scalar);
  j["normalized_scalar"] = finite_or_null(d.normalized_scalar);
  return j;
}

ordered_json curvature_probe(const json& config) {
  only_keys(config, {"metric", "point"}, "probe config");
  if (!config.contains("metric") || !config.contains("point")) {
    config_error("probe config needs 'metric' and 'point'");
  }
  const MetricSpec g = metric_from_json(config["metric"]);
  const json& p = config["point"];
  if (!p.is_array()) config_error("point must be an array of numbers");
  Point point;
  for (const json& v : p) point.push_back(number(v, "point coordinate"));
  if (point.size() != g.dim()) {
    throw Error(ErrorCode::Precondition, "point has " + std::to_string(point.size()) +
                                             " coordinates, chart has " + std::to_string(g.dim()));
  }
  return curvature_json(CurvatureEngine(g).curvature(point));
}

}  // namespace confein
