#include "confein/catalog.hpp"

#include "confein/errors.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace confein {
namespace {

using Params = std::map<std::string, double>;

constexpr double kPi = std::numbers::pi;

std::vector<std::string> numbered(const std::string& stem, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= k; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

// Angles of a round S^k chart: (0, pi) except the last, which runs over (0, 2 pi).
std::vector<Interval> angle_domain(std::size_t k) {
  std::vector<Interval> d(k, Interval{0.0, kPi});
  if (k) d.back() = Interval{0.0, 2.0 * kPi};
  return d;
}

MetricSpec rebase(const MetricSpec& g, Chart chart) {
  std::vector<Expr> entries;
  for (std::size_t i = 0; i < g.dim(); ++i) {
    for (std::size_t j = 0; j < g.dim(); ++j) entries.push_back(g.entry(i, j));
  }
  return MetricSpec(std::move(chart), std::move(entries));
}

std::vector<std::pair<std::string, bool>> conformal_expectations(bool einstein, bool mixed,
                                                                 bool split) {
  return {{"einstein.direct", einstein},   {"conformally_einstein", einstein},
          {"mixed_ricci_flat", mixed},     {"split_factor", split},
          {"dichotomy", einstein},          {"oracle.ricci", true},
          {"oracle.scalar", true},         {"oracle.connection", true}};
}

ExpectedConstant derived(std::string name, double value, bool relative = false) {
  return {std::move(name), value, 1e-6, relative, "derived"};
}

ExpectedConstant published(std::string name, double value) {
  return {std::move(name), value, 1e-6, false, "published"};
}

std::size_t dimension(const Params& p, const std::string& key, std::size_t min) {
  const double v = p.at(key);
  if (v < static_cast<double>(min)) {
    throw Error(ErrorCode::BadParameter, key + " must be at least " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

double positive(const Params& p, const std::string& key) {
  const double v = p.at(key);
  if (!(v > 0.0)) throw Error(ErrorCode::BadParameter, key + " must be positive");
  return v;
}

Expr square_norm(const Chart& c) {
  Expr sum = Expr::constant(0.0);
  for (std::size_t i = 0; i < c.dim(); ++i) sum = sum + pow(c.coordinate(i), 2.0);
  return sum;
}

// ---------------------------------------------------------------------------
// Scenario builders

Scenario thm2_flat(const Params& p) {
  const std::size_t n1 = dimension(p, "n1", 1);
  const std::size_t n2 = dimension(p, "n2", 1);
  if (n1 + n2 < 3) throw Error(ErrorCode::BadParameter, "n1 + n2 must be at least 3");
  const double r = positive(p, "R");
  const double a1 = std::isnan(p.at("A1")) ? 0.5 * r * r : p.at("A1");
  const double a2 = r * r - a1;
  const double n = static_cast<double>(n1 + n2);

  const MetricSpec g1 = builtin_metric(MetricKind::Euclidean, n1);
  const MetricSpec g2 = builtin_metric(MetricKind::Euclidean, n2);
  BlockMetricSpec blocks = product(g1, g2);
  const Expr phi1 = 0.5 * (square_norm(g1.chart()) + a1);
  const Expr phi2 = 0.5 * (square_norm(g2.chart()) + a2);
  const Expr phi = blocks.lift(0, phi1) + blocks.lift(1, phi2);

  Scenario s;
  s.kind = ScenarioKind::ConformalProduct;
  s.conformal = ConformalSpec(std::move(blocks), phi);
  s.phi1 = phi1;
  s.phi2 = phi2;
  s.expected = conformal_expectations(true, true, true);
  s.expected.insert(s.expected.begin() + 5,
                    {{"case2", true}, {"lemma2", true}, {"lemma3", true}});
  s.constants = {derived("lambda_bar", (n - 1.0) * r * r, true),
                 derived("rho_bar", r * r, true),
                 published("a_bar", 0.0),
                 published("b_bar", -1.0),
                 derived("c_bar_1", a1),
                 derived("c_bar_2", a2),
                 derived("lambda_1", 0.0),
                 derived("lambda_2", 0.0),
                 derived("a1", 0.0),
                 derived("b1", -static_cast<double>(n1)),
                 derived("a2", 0.0),
                 derived("b2", -static_cast<double>(n2)),
                 derived("c1", n * a1),
                 derived("c2", n * a2)};
  s.notes.push_back("phi = (|x|^2 + |y|^2 + R^2) / 2 split as phi_i = (|x_i|^2 + A_i) / 2");
  return s;
}

Scenario sphere_hyperbolic(const Params& p) {
  const std::size_t n1 = dimension(p, "n1", 1);
  const std::size_t n2 = dimension(p, "n2", 1);
  if (n1 + n2 < 3) throw Error(ErrorCode::BadParameter, "n1 + n2 must be at least 3");
  const double b = p.at("b");
  const double d1 = static_cast<double>(n1);
  const double d2 = static_cast<double>(n2);
  const double n = d1 + d2;

  const MetricSpec g1 = builtin_metric(MetricKind::Sphere, n1);
  MetricSpec g2 = builtin_metric(MetricKind::Hyperbolic, n2);
  g2 = rebase(g2, g2.chart().with_interval(0, {0.5, 2.0}));
  BlockMetricSpec blocks = product(g1, g2);
  const Expr phi1 = cos(g1.chart().coordinate(0)) - b;
  const Expr phi2 = cosh(g2.chart().coordinate(0)) + b;
  const Expr phi = blocks.lift(0, phi1) + blocks.lift(1, phi2);

  Scenario s;
  s.kind = ScenarioKind::ConformalProduct;
  s.conformal = ConformalSpec(std::move(blocks), phi);
  s.phi1 = phi1;
  s.phi2 = phi2;
  s.expected = conformal_expectations(true, true, true);
  s.expected.insert(s.expected.begin() + 5,
                    {{"case2", true}, {"lemma2", true}, {"lemma3", true}});
  s.constants = {derived("lambda_bar", 0.0),
                 derived("rho_bar", 0.0),
                 derived("a_bar", 1.0),
                 derived("b_bar", b),
                 derived("c_bar_1", b * b - 1.0),
                 derived("c_bar_2", 1.0 - b * b),
                 derived("lambda_1", d1 - 1.0),
                 derived("lambda_2", -(d2 - 1.0)),
                 derived("a1", d1),
                 derived("b1", d1 * b),
                 derived("a2", -d2),
                 derived("b2", d2 * b),
                 derived("c1", n * (b * b - 1.0)),
                 derived("c2", n * (1.0 - b * b))};
  s.notes.push_back("the hyperbolic radius t1 is restricted to (0.5, 2) so that phi stays positive");
  return s;
}

Scenario mo_cylinder(const Params&) {
  const MetricSpec m = product(builtin_metric(MetricKind::Sphere, 2, 0.5),
                               builtin_metric(MetricKind::Sphere, 3, 1.0 / std::sqrt(2.0)))
                           .joint();
  const MetricSpec line(Chart({"t"}, {{-2.0, 2.0}}), {Expr::constant(1.0)});
  const Expr t = line.chart().coordinate(0);
  BlockMetricSpec blocks = product(m, line);
  const Expr phi1 = Expr::constant(0.0);
  const Expr phi2 = cosh(t);
  const Expr phi = blocks.lift(1, phi2);

  Scenario s;
  s.kind = ScenarioKind::ConformalProduct;
  s.conformal = ConformalSpec(std::move(blocks), phi);
  s.phi1 = phi1;
  s.phi2 = phi2;
  s.warped = WarpedSpec{conformal_metric(ConformalSpec(line, phi2)), m, 1.0 / phi2, std::nullopt,
                        std::nullopt};
  s.expected = conformal_expectations(true, true, true);
  s.expected.insert(s.expected.begin() + 5, {"case1", true});
  s.constants = {derived("lambda_bar", 5.0, true), derived("lambda_fiber", 4.0, true)};
  s.notes.push_back(
      "M' = S^2(1/2) x S^3(1/sqrt 2) is 5-dimensional with ric = 4 g, the dimension for which "
      "cosh(t)^-2 (g' + dt^2) is Einstein");
  s.notes.push_back("M' is not a round sphere by construction");
  return s;
}

Scenario warped_sphere(const Params& p) {
  const std::size_t k = dimension(p, "p", 1);
  const double pd = static_cast<double>(k);
  const MetricSpec base(Chart({"u"}, {{0.0, kPi}}), {Expr::constant(1.0)});
  const MetricSpec fiber = builtin_metric(MetricKind::Sphere, k);
  const Expr f = sin(base.chart().coordinate(0));

  Scenario s;
  s.kind = ScenarioKind::Warped;
  s.warped = WarpedSpec{base, fiber, f, std::nullopt, std::nullopt};
  s.conformal = warped_conformal_form(*s.warped);
  s.expected = conformal_expectations(true, true, true);
  s.expected.insert(s.expected.begin(), {"case1", true});
  s.constants = {derived("lambda_bar", pd, true), derived("lambda_fiber", pd - 1.0)};
  return s;
}

Scenario non_splitting(const Params&) {
  BlockMetricSpec blocks = product(builtin_metric(MetricKind::Euclidean, 2),
                                   builtin_metric(MetricKind::Euclidean, 2));
  const Expr phi = blocks.joint().chart().parse("exp(f0.x1 + f1.x1)");
  Scenario s;
  s.kind = ScenarioKind::ConformalProduct;
  s.conformal = ConformalSpec(std::move(blocks), phi);
  s.expected = conformal_expectations(false, false, false);
  s.notes.push_back("expected to fail: phi has a cross-factor second derivative");
  return s;
}

Scenario twisted_split(const Params& p) {
  const double alpha = p.at("alpha");
  const double beta = p.at("beta");
  if (!(alpha > -1.0)) throw Error(ErrorCode::BadParameter, "alpha must exceed -1");
  const MetricSpec base = builtin_metric(MetricKind::Euclidean, 2);
  const MetricSpec fiber = builtin_metric(MetricKind::Sphere, 2);
  const Expr f1 = 1.0 + alpha * pow(base.chart().coordinate(0), 2.0);
  const Expr f2 = cosh(beta * fiber.chart().coordinate(0));
  const Chart joint = joint_chart(base.chart(), fiber.chart());
  const Expr f = shift_coordinates(f1, 0, BlockMetricSpec::prefix(0)) *
                 shift_coordinates(f2, base.dim(), BlockMetricSpec::prefix(1));

  Scenario s;
  s.kind = ScenarioKind::Twisted;
  s.twisted = twisted_metric(base, f, fiber);
  s.conformal = split_twisted_conformal_form(base, f1, f2, fiber);
  s.expected = {{"twisted_identity", true}, {"einstein.direct", false}, {"dichotomy", false},
                {"oracle.ricci", true},     {"oracle.scalar", true},    {"oracle.connection", true}};
  s.notes.push_back("f = f1(x) f2(y) with f1 = 1 + alpha x1^2 and f2 = cosh(beta s1)");
  return s;
}

Scenario doubly_twisted_einstein(const Params& p) {
  const std::size_t n1 = dimension(p, "n1", 1);
  const std::size_t n2 = dimension(p, "n2", 1);
  if (n1 + n2 < 3) throw Error(ErrorCode::BadParameter, "n1 + n2 must be at least 3");
  const double r = positive(p, "R");
  const double n = static_cast<double>(n1 + n2);
  const MetricSpec g1 = builtin_metric(MetricKind::Euclidean, n1);
  const MetricSpec g2 = builtin_metric(MetricKind::Euclidean, n2);
  BlockMetricSpec blocks = product(g1, g2);
  const Expr phi = 0.5 * (square_norm(blocks.joint().chart()) + r * r);

  Scenario s;
  s.kind = ScenarioKind::DoublyTwisted;
  s.doubly_twisted = DoublyTwistedSpec{g1, g2, 1.0 / phi, 1.0 / phi};
  s.conformal = ConformalSpec(std::move(blocks), phi);
  s.expected = {{"einstein.direct", true},      {"warped_form", false},
                {"doubly_twisted_identity", true}, {"oracle.ricci", true},
                {"oracle.scalar", true},        {"oracle.connection", true}};
  s.constants = {derived("lambda_bar", (n - 1.0) * r * r, true)};
  s.notes.push_back("b = f = 1/phi depend on both factors, so the metric is not warped");
  return s;
}

Scenario product_mismatch(const Params&) {
  BlockMetricSpec blocks = product(builtin_metric(MetricKind::Sphere, 2),
                                   builtin_metric(MetricKind::Hyperbolic, 2));
  Scenario s;
  s.kind = ScenarioKind::ConformalProduct;
  s.conformal = ConformalSpec(std::move(blocks), Expr::constant(1.0));
  s.expected = conformal_expectations(false, true, true);
  s.notes.push_back("expected to fail: the factors have Einstein constants 1 and -1");
  return s;
}

Scenario lemma3_counterexample(const Params&) {
  const MetricSpec g1 = builtin_metric(MetricKind::Sphere, 2);
  const MetricSpec g2 = builtin_metric(MetricKind::Euclidean, 2);
  BlockMetricSpec blocks = product(g1, g2);
  const Expr phi1 = 2.0 + cos(g1.chart().coordinate(0));
  const Expr phi2 = pow(g2.chart().coordinate(0), 2.0);
  const Expr phi = blocks.lift(0, phi1) + blocks.lift(1, phi2);

  Scenario s;
  s.kind = ScenarioKind::ConformalProduct;
  s.conformal = ConformalSpec(std::move(blocks), phi);
  s.phi1 = phi1;
  s.phi2 = phi2;
  s.expected = conformal_expectations(false, true, true);
  s.expected.insert(s.expected.begin() + 5,
                    {{"case2", false}, {"lemma2", false}, {"lemma3", false}});
  s.notes.push_back("expected to fail: the Hessian of phi2 = x1^2 is not proportional to g2");
  return s;
}

struct Entry {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  std::function<Scenario(const Params&)> build;
};

const std::vector<Entry>& registry() {
  constexpr double kAuto = std::numeric_limits<double>::quiet_NaN();
  static const std::vector<Entry> entries = {
      {"thm2_flat",
       "flat R^n1 x R^n2 with phi = (|x|^2 + |y|^2 + R^2)/2",
       {{"n1", 2, true, "dimension of the first factor"},
        {"n2", 2, true, "dimension of the second factor"},
        {"R", 1, false, "radius parameter, > 0"},
        {"A1", kAuto, false, "constant of the first summand; defaults to R^2/2"}},
       thm2_flat},
      {"sphere_hyperbolic",
       "S^n1 x H^n2 with phi1 = cos(s) - b, phi2 = cosh(t) + b",
       {{"n1", 2, true, "sphere dimension"},
        {"n2", 2, true, "hyperbolic dimension"},
        {"b", 0, false, "shift between the summands"}},
       sphere_hyperbolic},
      {"mo_cylinder", "M' x R with phi = cosh(t), M' = S^2(1/2) x S^3(1/sqrt 2)", {}, mo_cylinder},
      {"warped_sphere",
       "du^2 + sin^2(u) g_{S^p}",
       {{"p", 2, true, "fiber dimension"}},
       warped_sphere},
      {"non_splitting", "flat R^2 x R^2 with phi = exp(x1 + y1)", {}, non_splitting},
      {"twisted_split",
       "R^2 x S^2 twisted by f = (1 + alpha x1^2) cosh(beta s1)",
       {{"alpha", 0.5, false, "coefficient of the base factor, > -1"},
        {"beta", 0.7, false, "rate of the fiber factor"}},
       twisted_split},
      {"doubly_twisted_einstein",
       "flat R^n1 x R^n2 doubly twisted by b = f = 1/phi",
       {{"n1", 2, true, "dimension of the base"},
        {"n2", 2, true, "dimension of the fiber"},
        {"R", 1, false, "radius parameter, > 0"}},
       doubly_twisted_einstein},
      {"product_mismatch", "S^2 x H^2 with phi = 1", {}, product_mismatch},
      {"lemma3_counterexample",
       "S^2 x R^2 with phi1 = 2 + cos(s1), phi2 = x1^2",
       {},
       lemma3_counterexample},
  };
  return entries;
}

const Entry& find(const std::string& name) {
  for (const Entry& e : registry()) {
    if (e.name == name) return e;
  }
  throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
}

}  // namespace

MetricKind parse_metric_kind(const std::string& name) {
  if (name == "euclidean") return MetricKind::Euclidean;
  if (name == "sphere") return MetricKind::Sphere;
  if (name == "hyperbolic") return MetricKind::Hyperbolic;
  throw Error(ErrorCode::BadParameter, "unknown metric kind '" + name + "'");
}

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::Sphere: return "sphere";
    case MetricKind::Hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

MetricSpec builtin_metric(MetricKind kind, std::size_t dim, double scale) {
  if (dim < 1) throw Error(ErrorCode::UnsupportedDim, "built-in metrics need dimension >= 1");
  if (!(scale > 0.0)) throw Error(ErrorCode::BadParameter, "scale must be positive");
  const double s2 = scale * scale;

  switch (kind) {
    case MetricKind::Euclidean: {
      Chart chart(numbered("x", dim), std::vector<Interval>(dim, Interval{-1.0, 1.0}));
      return MetricSpec::diagonal(std::move(chart), std::vector<Expr>(dim, Expr::constant(s2)));
    }
    case MetricKind::Sphere: {
      Chart chart(numbered("s", dim), angle_domain(dim));
      std::vector<Expr> diag;
      Expr profile = Expr::constant(s2);
      for (std::size_t i = 0; i < dim; ++i) {
        diag.push_back(profile);
        profile = profile * pow(sin(chart.coordinate(i)), 2.0);
      }
      return MetricSpec::diagonal(std::move(chart), std::move(diag));
    }
    case MetricKind::Hyperbolic: {
      std::vector<Interval> domain{{0.0, 2.0}};
      for (const Interval& a : angle_domain(dim - 1)) domain.push_back(a);
      Chart chart(numbered("t", dim), std::move(domain));
      std::vector<Expr> diag{Expr::constant(s2)};
      Expr profile = s2 * pow(sinh(chart.coordinate(0)), 2.0);
      for (std::size_t i = 1; i < dim; ++i) {
        diag.push_back(profile);
        profile = profile * pow(sin(chart.coordinate(i)), 2.0);
      }
      return MetricSpec::diagonal(std::move(chart), std::move(diag));
    }
  }
  throw Error(ErrorCode::BadParameter, "unknown metric kind");
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Entry& e : registry()) out.push_back(e.name);
    return out;
  }();
  return names;
}

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  for (const Entry& e : registry()) {
    out.push_back({e.name, e.summary, e.params, instantiate(e.name).expected});
  }
  return out;
}

Scenario instantiate(const std::string& name, const std::map<std::string, double>& overrides) {
  const Entry& e = find(name);
  Params p;
  for (const ParamSpec& spec : e.params) p[spec.name] = spec.default_value;
  for (const auto& [key, value] : overrides) {
    const auto it = std::find_if(e.params.begin(), e.params.end(),
                                 [&](const ParamSpec& s) { return s.name == key; });
    if (it == e.params.end()) {
      throw Error(ErrorCode::BadParameter, "scenario '" + name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw Error(ErrorCode::BadParameter, key + " must be finite");
    if (it->integer && value != std::floor(value)) {
      throw Error(ErrorCode::BadParameter, key + " must be an integer");
    }
    p[key] = value;
  }
  Scenario s = e.build(p);
  s.name = name;
  s.parameters = p;
  return s;
}

std::vector<std::pair<std::string, ConformalSpec>> oracle_pairs() {
  std::vector<std::pair<std::string, ConformalSpec>> out;
  auto single = [&](const std::string& name, const MetricSpec& g, const std::string& phi) {
    out.emplace_back(name, ConformalSpec(g, g.chart().parse(phi)));
  };
  single("euclidean3_quadratic", builtin_metric(MetricKind::Euclidean, 3), "1 + x1^2 + 0.5*x2*x3");
  single("euclidean2_exp", builtin_metric(MetricKind::Euclidean, 2), "exp(x1*x2)");
  single("sphere2_cos", builtin_metric(MetricKind::Sphere, 2), "2 + cos(s1)");
  single("sphere3_mixed", builtin_metric(MetricKind::Sphere, 3), "2 + sin(s1)*cos(s2)");
  single("hyperbolic2_cosh", builtin_metric(MetricKind::Hyperbolic, 2), "cosh(t1) + 0.3*sin(t2)");
  single("hyperbolic3_scaled", builtin_metric(MetricKind::Hyperbolic, 3, 2.0), "1 + t1^2");
  out.emplace_back("thm2_flat", *instantiate("thm2_flat").conformal);
  out.emplace_back("sphere_hyperbolic", *instantiate("sphere_hyperbolic", {{"b", 0.3}}).conformal);
  {
    BlockMetricSpec b = product(builtin_metric(MetricKind::Sphere, 2),
                                builtin_metric(MetricKind::Hyperbolic, 2));
    Expr phi = b.joint().chart().parse("exp(0.3*f0.s1 + 0.2*f1.t1)");
    out.emplace_back("sphere_hyperbolic_nonsplit", ConformalSpec(std::move(b), std::move(phi)));
  }
  out.emplace_back("mo_cylinder", *instantiate("mo_cylinder").conformal);
  return out;
}

std::vector<SplitInstance> split_instances() {
  std::vector<SplitInstance> out;
  auto from = [&](const std::string& name, const std::map<std::string, double>& params = {}) {
    Scenario s = instantiate(name, params);
    out.push_back({name, *s.conformal->blocks, s.conformal->phi, true});
  };
  from("thm2_flat");
  from("sphere_hyperbolic", {{"b", 0.3}});
  from("mo_cylinder");
  from("warped_sphere");
  from("lemma3_counterexample");
  from("product_mismatch");

  auto negative = [&](const std::string& name, const MetricSpec& g1, const MetricSpec& g2,
                      const std::string& phi) {
    BlockMetricSpec b = product(g1, g2);
    Expr e = b.joint().chart().parse(phi);
    out.push_back({name, std::move(b), std::move(e), false});
  };
  const MetricSpec e1 = builtin_metric(MetricKind::Euclidean, 1);
  const MetricSpec e2 = builtin_metric(MetricKind::Euclidean, 2);
  out.push_back({"non_splitting", *instantiate("non_splitting").conformal->blocks,
                 instantiate("non_splitting").conformal->phi, false});
  negative("flat_bilinear", e2, e2, "2 + f0.x1*f1.x2");
  negative("sphere_hyperbolic_exp", builtin_metric(MetricKind::Sphere, 2),
           builtin_metric(MetricKind::Hyperbolic, 2), "exp(0.3*f0.s1 + 0.2*f1.t1)");
  negative("flat_sine_product", e1, e2, "3 + sin(f0.x1)*cos(f1.x2)");
  return out;
}

}  // namespace confein
