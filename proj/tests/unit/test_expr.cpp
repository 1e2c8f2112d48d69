#include "confein/errors.hpp"
#include "confein/expr.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <thread>

using namespace confein;

namespace {

std::vector<std::string> xy{"x", "y"};
std::vector<std::string> st{"s", "t"};

double eval(const Expr& e, std::vector<double> p) { return evaluate(e, p); }

}  // namespace

TEST(ExprParse, SumOfSquaresHasExpectedShape) {
  const Expr e = parse("x^2 + y^2", xy);
  ASSERT_EQ(e.kind(), Expr::Kind::Binary);
  EXPECT_EQ(e.binary_op(), BinaryOp::Add);
  for (std::size_t i = 0; i < 2; ++i) {
    const Expr& term = e.operand(i);
    ASSERT_EQ(term.kind(), Expr::Kind::Power);
    EXPECT_EQ(term.exponent(), 2.0);
    EXPECT_EQ(term.operand().kind(), Expr::Kind::Coordinate);
    EXPECT_EQ(term.operand().index(), i);
  }
  EXPECT_EQ(eval(e, {3, 4}), 25.0);
}

TEST(ExprParse, HyperbolicPlusCircular) {
  const Expr e = parse("cosh(t) + cos(s)", st);
  EXPECT_EQ(eval(e, {0, 0}), 2.0);
  EXPECT_EQ(e.arity(), 2u);
}

TEST(ExprParse, TrailingOperatorIsSyntaxErrorAtEnd) {
  try {
    parse("x + ", std::vector<std::string>{"x"});
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Syntax);
    EXPECT_EQ(e.position(), 4u);
  }
}

TEST(ExprParse, UnknownIdentifierReportsNameAndPosition) {
  try {
    parse("x + zeta", std::vector<std::string>{"x"});
    FAIL() << "expected UnknownIdentifier";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownIdentifier);
    EXPECT_NE(std::string(e.what()).find("zeta"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
}

TEST(ExprParse, Precedence) {
  const std::vector<std::string> x{"x"};
  EXPECT_EQ(eval(parse("-x^2", x), {3}), -9.0);
  EXPECT_EQ(eval(parse("2*x^2", x), {3}), 18.0);
  EXPECT_EQ(eval(parse("1 - x - 1", x), {3}), -3.0);
  EXPECT_EQ(eval(parse("8 / x / 2", x), {2}), 2.0);
  EXPECT_EQ(eval(parse("-x * -x", x), {3}), 9.0);
  EXPECT_DOUBLE_EQ(eval(parse("2*pi", x), {0}), 2.0 * M_PI);
  EXPECT_DOUBLE_EQ(eval(parse("1.5e-1 + x", x), {0}), 0.15);
}

TEST(ExprParse, NonConstantExponentRejected) {
  EXPECT_THROW(parse("x^x", std::vector<std::string>{"x"}), SyntaxError);
  EXPECT_EQ(eval(parse("x^(1+1)", std::vector<std::string>{"x"}), {3}), 9.0);
}

TEST(ExprParse, MalformedInputs) {
  const std::vector<std::string> x{"x"};
  for (const char* bad : {"", "(x", "x)", "sin x", "sin()", "x ** 2", "3x", "@"}) {
    EXPECT_THROW(parse(bad, x), Error) << bad;
  }
  EXPECT_THROW(parse("foo(x)", x), Error);
}

TEST(ExprParse, DuplicateCoordinatesRejected) {
  EXPECT_THROW(parse("x", std::vector<std::string>{"x", "x"}), Error);
}

TEST(ExprParse, DottedNames) {
  const std::vector<std::string> c{"f0.x1", "f1.x1"};
  EXPECT_EQ(eval(parse("f0.x1 * f1.x1", c), {2, 3}), 6.0);
}

TEST(ExprDifferentiate, Examples) {
  const std::vector<std::string> x{"x"};
  const Expr d = differentiate(parse("x^2", x), 0);
  EXPECT_EQ(print(d), "2 * x");
  const Expr ds = differentiate(parse("cos(s)", st), 0);
  EXPECT_TRUE(structurally_equal(ds, -sin(Expr::coordinate(0, "s"))));
  const Expr dt = differentiate(parse("cosh(t)", st), 1);
  EXPECT_TRUE(structurally_equal(dt, sinh(Expr::coordinate(1, "t"))));
  EXPECT_TRUE(differentiate(parse("cosh(t)", st), 0).is_constant(0.0));
}

TEST(ExprEvaluate, DomainErrors) {
  const std::vector<std::string> x{"x"};
  EXPECT_THROW(eval(parse("log(x)", x), {-1}), Error);
  EXPECT_THROW(eval(parse("sqrt(x)", x), {-1}), Error);
  EXPECT_THROW(eval(parse("1/x", x), {0}), Error);
  EXPECT_THROW(eval(parse("x^0.5", x), {-1}), Error);
  try {
    eval(parse("1 + log(x)", x), {-1});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Domain);
    EXPECT_EQ(e.node(), "log(x)");
  }
}

TEST(ExprEvaluate, ShortPointIsPrecondition) {
  EXPECT_THROW(eval(parse("x + y", xy), {1}), Error);
}

TEST(ExprJet, Examples) {
  const Jet2 j = jet2(parse("x*y", xy), std::vector<double>{2, 3});
  EXPECT_EQ(j.value, 6.0);
  EXPECT_EQ(j.gradient, Eigen::Vector2d(3, 2));
  EXPECT_EQ(j.hessian, (Eigen::Matrix2d() << 0, 1, 1, 0).finished());

  const Jet2 c = jet2(parse("cos(s)", std::vector<std::string>{"s"}), std::vector<double>{0});
  EXPECT_EQ(c.value, 1.0);
  EXPECT_EQ(c.gradient[0], 0.0);
  EXPECT_EQ(c.hessian(0, 0), -1.0);

  const Expr half = parse("0.5*(x^2 + y^2)", xy);
  for (auto p : {std::vector<double>{0.3, -0.7}, std::vector<double>{2, 5}}) {
    EXPECT_EQ(jet2(half, p).hessian, Eigen::Matrix2d::Identity());
  }
}

TEST(ExprJet, HessianIsExactlySymmetric) {
  gen::ExprGen g(7, 3);
  for (int k = 0; k < 50; ++k) {
    const Expr e = g(4);
    const Jet2 j = jet2(e, g.point());
    EXPECT_EQ(j.hessian, j.hessian.transpose());
  }
}

TEST(ExprProperty, GradientMatchesCentralDifferences) {
  gen::ExprGen g(20240611, 3);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    const Expr e = g(5);
    const std::vector<double> p = g.point();
    const double v = evaluate(e, p);
    if (!std::isfinite(v) || std::abs(v) > 1e6) continue;
    const Jet2 j = jet2(e, p);
    for (std::size_t i = 0; i < 3; ++i) {
      const double h = 1e-5;
      std::vector<double> a = p, b = p;
      a[i] += h;
      b[i] -= h;
      const double fd = (evaluate(e, a) - evaluate(e, b)) / (2 * h);
      const double sym = j.gradient[static_cast<Eigen::Index>(i)];
      const double scale = std::max({1.0, std::abs(sym), std::abs(v)});
      EXPECT_LT(std::abs(sym - fd) / scale, 1e-6) << print(e) << " coordinate " << i;
    }
    ++checked;
  }
  EXPECT_GT(checked, 250);
}

TEST(ExprProperty, MixedPartialsCommute) {
  gen::ExprGen g(99, 2);
  for (int k = 0; k < 40; ++k) {
    const Expr e = g(5);
    const Expr dxy = differentiate(differentiate(e, 0), 1);
    const Expr dyx = differentiate(differentiate(e, 1), 0);
    for (int m = 0; m < 100; ++m) {
      const std::vector<double> p = g.point();
      const double a = evaluate(dxy, p);
      const double b = evaluate(dyx, p);
      if (!std::isfinite(a)) continue;
      EXPECT_LE(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(a))) << print(e);
    }
  }
}

TEST(ExprProperty, PrintParseRoundTrip) {
  gen::ExprGen g(4242, 3);
  const std::vector<std::string> names = g.names();
  for (int k = 0; k < 300; ++k) {
    const Expr e = g(5);
    const std::string text = print(e);
    const Expr back = parse(text, names);
    EXPECT_TRUE(structurally_equal(e, back)) << text << " vs " << print(back);
    EXPECT_EQ(print(back), text);
    for (int m = 0; m < 5; ++m) {
      const std::vector<double> p = g.point();
      const double a = evaluate(e, p);
      if (!std::isfinite(a)) continue;
      EXPECT_EQ(a, evaluate(back, p)) << text;
    }
  }
}

TEST(ExprProperty, PrinterKeepsAwkwardConstants) {
  const std::vector<std::string> x{"x"};
  for (double c : {-2.0, 1e-300, 0.1, -0.0, 1e21, 3.0000000000000004}) {
    const Expr e = Expr::constant(c) - Expr::constant(c) * Expr::coordinate(0, "x");
    const Expr back = parse(print(e), x);
    EXPECT_EQ(evaluate(e, std::vector<double>{0.7}), evaluate(back, std::vector<double>{0.7})) << print(e);
  }
  EXPECT_EQ(print(pow(Expr::coordinate(0, "x"), -2.0)), "x^(-2)");
}

TEST(ExprSimplify, FoldingAndIdentities) {
  const Expr x = Expr::coordinate(0, "x");
  EXPECT_TRUE((Expr::constant(2) * Expr::constant(3)).is_constant(6));
  EXPECT_TRUE((x * 0.0).is_constant(0));
  EXPECT_TRUE((x * 1.0).same_node(x));
  EXPECT_TRUE((x + 0.0).same_node(x));
  EXPECT_TRUE(pow(x, 1.0).same_node(x));
  EXPECT_TRUE(pow(x, 0.0).is_constant(1));
  EXPECT_TRUE((-(-x)).same_node(x));
}

TEST(ExprCoordinates, ReplaceAndShift) {
  const Expr e = parse("x*y + sin(x)", xy);
  const Expr shifted = shift_coordinates(e, 3, "f1.");
  EXPECT_EQ(shifted.arity(), 5u);
  EXPECT_EQ(print(shifted), "f1.x * f1.y + sin(f1.x)");
  const Expr fixed = replace_coordinates(e, [](const Expr& c) {
    return c.index() == 1 ? Expr::constant(2.0) : c;
  });
  EXPECT_EQ(evaluate(fixed, std::vector<double>{0.5}), 0.5 * 2.0 + std::sin(0.5));
}

TEST(ExprJetEngine, MatchesFreeFunction) {
  gen::ExprGen g(5, 3);
  for (int k = 0; k < 30; ++k) {
    const Expr e = g(4);
    const ExprJet jet(e, 3);
    const std::vector<double> p = g.point();
    const Jet2 a = jet.evaluate(p);
    const Jet2 b = jet2(e, p);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.gradient, b.gradient);
    EXPECT_EQ(a.hessian, b.hessian);
  }
}

TEST(ExprConcurrency, SharedEvaluationIsConsistent) {
  gen::ExprGen g(11, 3);
  const Expr e = g(6);
  const ExprJet jet(e, 3);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 200; ++i) points.push_back(g.point());
  std::vector<double> serial;
  for (const auto& p : points) serial.push_back(jet.evaluate(p).hessian.sum());
  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (const auto& p : points) results[t].push_back(jet.evaluate(p).hessian.sum());
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, serial);
}
