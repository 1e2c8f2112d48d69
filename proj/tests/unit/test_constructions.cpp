#include "confein/catalog.hpp"
#include "confein/constructions.hpp"
#include "confein/errors.hpp"

#include "fd_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace confein;

namespace {

double sup_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Product, NamingAndOffsets) {
  const BlockMetricSpec b = product(builtin_metric(MetricKind::Sphere, 2),
                                    builtin_metric(MetricKind::Euclidean, 3));
  EXPECT_EQ(b.dim(), 5u);
  EXPECT_EQ(b.offset(1), 2u);
  EXPECT_EQ(b.joint().chart().names(),
            (std::vector<std::string>{"f0.s1", "f0.s2", "f1.x1", "f1.x2", "f1.x3"}));
  EXPECT_EQ(b.factor_of(0), 0u);
  EXPECT_EQ(b.factor_of(4), 1u);
  const Expr lifted = b.lift(1, b.factor(1).chart().parse("x2"));
  EXPECT_EQ(print(lifted), "f1.x2");
  const Point p = b.join({{1.0, 2.0}, {0.1, 0.2, 0.3}});
  EXPECT_EQ(p, (Point{1.0, 2.0, 0.1, 0.2, 0.3}));
  EXPECT_EQ(b.part(1, p), (Point{0.1, 0.2, 0.3}));
  EXPECT_EQ(evaluate(lifted, p), 0.2);
  const Eigen::MatrixXd g = b.joint().evaluate(p);
  EXPECT_EQ(g(0, 2), 0.0);
  EXPECT_NEAR(g(1, 1), std::pow(std::sin(1.0), 2), 1e-15);
}

TEST(Conformal, NonPositiveFactorRejected) {
  const MetricSpec g = builtin_metric(MetricKind::Euclidean, 2);
  try {
    conformal_metric(ConformalSpec(g, g.chart().parse("x1")));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveConformalFactor);
  }
}

TEST(Conformal, MetricEntriesAreScaled) {
  const MetricSpec g = builtin_metric(MetricKind::Sphere, 2);
  const Expr phi = g.chart().parse("2 + cos(s1)");
  const MetricSpec gb = conformal_metric(ConformalSpec(g, phi));
  const Point p{0.7, 1.1};
  const double f = 2 + std::cos(0.7);
  EXPECT_LT(sup_abs(gb.evaluate(p) - g.evaluate(p) / (f * f)), 1e-15);
}

TEST(Conformal, FormulaMatchesDirectCurvatureOnCatalogPairs) {
  const auto pairs = oracle_pairs();
  ASSERT_EQ(pairs.size(), 10u);
  for (const auto& [name, c] : pairs) {
    const MetricSpec gb = conformal_metric(c);
    const CurvatureEngine direct(gb);
    const ConformalFormulas formulas(c);
    for (const Point& p : sample(c.base.chart(), {.count = 25})) {
      const CurvatureData d = direct.curvature(p);
      EXPECT_LT(sup_abs(formulas.ricci(p) - d.ricci) / (1 + sup_abs(d.ricci)), 1e-10) << name;
      EXPECT_LT(std::abs(formulas.scalar(p) - d.scalar) / (1 + std::abs(d.scalar)), 1e-10) << name;
    }
  }
}

TEST(Conformal, ConnectionMatchesFiniteDifferences) {
  const MetricSpec g = builtin_metric(MetricKind::Hyperbolic, 3);
  const ConformalSpec c(g, g.chart().parse("2 + sin(t2) * t1"));
  const MetricSpec gb = conformal_metric(c);
  for (const Point& p : sample(g.chart(), {.count = 5})) {
    const fd::Christoffels o = fd::christoffel([&](const fd::Point& q) { return gb.evaluate(q); }, p);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        const Eigen::VectorXd v = conformal_connection(c, i, j, p);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(v[static_cast<Eigen::Index>(k)], o(k, i, j), 1e-8);
      }
  }
}

TEST(Conformal, AnalystSignLaplacianBreaksTheOracle) {
  // Flipping the Laplacian sign inside the Ricci formula must be detectable.
  const MetricSpec g = builtin_metric(MetricKind::Sphere, 3);
  const Expr phi = g.chart().parse("2 + cos(s1)");
  const ConformalSpec c(g, phi);
  const CurvatureEngine direct(conformal_metric(c));
  double worst = 0.0;
  for (const Point& p : sample(g.chart(), {.count = 20})) {
    const double f = evaluate(phi, p);
    const double lap = laplacian(phi, g, p);
    const Eigen::MatrixXd flipped = conformal_ricci_formula(c, p) + 2.0 * lap / f * g.evaluate(p);
    worst = std::max(worst, sup_abs(flipped - direct.curvature(p).ricci));
  }
  EXPECT_GT(worst, 1e-2);
}

TEST(Warped, MetricLayoutAndConformalForm) {
  const MetricSpec base(Chart({"u"}, {{0.0, M_PI}}), {Expr::constant(1.0)});
  const MetricSpec fiber = builtin_metric(MetricKind::Sphere, 2);
  const WarpedSpec w{base, fiber, sin(base.chart().coordinate(0)), std::nullopt, std::nullopt};
  const MetricSpec g = warped_metric(w);
  EXPECT_EQ(g.chart().names(), (std::vector<std::string>{"f0.u", "f1.s1", "f1.s2"}));
  const Point p{1.0, 0.5, 2.0};
  const Eigen::MatrixXd m = g.evaluate(p);
  EXPECT_DOUBLE_EQ(m(1, 1), std::pow(std::sin(1.0), 2));
  // The warped metric is phi^-2 (f^-2 g_B + g_F) with phi = 1 / f.
  const ConformalSpec c = warped_conformal_form(w);
  EXPECT_LT(sup_abs(conformal_metric(c).evaluate(p) - m), 1e-14);
  // Round S^3: ric = 2 g.
  const CurvatureData d = curvature(g, p);
  EXPECT_LT(sup_abs(d.ricci - 2.0 * m), 1e-10);
}

TEST(Twisted, SplitTwistIsConformalToProduct) {
  const Scenario s = instantiate("twisted_split");
  ASSERT_TRUE(s.twisted && s.conformal);
  const ResidualReport r =
      metric_identity_check("twisted", *s.twisted, conformal_metric(*s.conformal), {}, 1e-12);
  EXPECT_TRUE(r.passed) << r.sup_residual;
}

TEST(DoublyTwisted, MatchesConformalFlat) {
  const Scenario s = instantiate("doubly_twisted_einstein");
  const MetricSpec d = doubly_twisted_metric(*s.doubly_twisted);
  const ResidualReport r = metric_identity_check("dt", d, conformal_metric(*s.conformal), {}, 1e-12);
  EXPECT_TRUE(r.passed) << r.sup_residual;
}

TEST(SplitInstances, Shape) {
  const auto inst = split_instances();
  ASSERT_EQ(inst.size(), 10u);
  int positive = 0;
  for (const auto& i : inst) positive += i.splits;
  EXPECT_EQ(positive, 6);
}
