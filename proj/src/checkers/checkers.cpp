#include "confein/checkers.hpp"

#include "confein/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace confein {
namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

double clean(double r) { return std::isnan(r) ? std::numeric_limits<double>::infinity() : r; }

struct Spread {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t count = 0;

  void add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double width() const { return count ? max - min : 0.0; }
};

// |v_i - min| / (1 + |mean|): its sup is the relative spread of the values.
ResidualReport constancy_report(std::string name, const std::vector<Point>& points,
                                const std::vector<double>& values, double tolerance) {
  Spread s;
  for (double v : values) s.add(v);
  std::vector<double> residuals;
  residuals.reserve(values.size());
  for (double v : values) residuals.push_back((v - s.min) / (1.0 + std::abs(s.mean())));
  return make_report(std::move(name), points, residuals, tolerance);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least squares y ~ slope * x + intercept.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y, ErrorCode on_fail,
                   const std::string& what) {
  const auto n = ix(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = x[static_cast<std::size_t>(i)];
    a(i, 1) = 1.0;
    rhs[i] = y[static_cast<std::size_t>(i)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[1] > 1e-10 * sv[0])) {
    throw Error(on_fail, what + ": design matrix is ill-conditioned (singular values " +
                             std::to_string(sv[0]) + ", " + std::to_string(sv[1]) + ")");
  }
  const Eigen::VectorXd sol = svd.solve(rhs);
  return {sol[0], sol[1]};
}

double lambda_of(const MetricSpec& g, const SamplePlan& plan, const Tolerances& tol,
                 std::optional<EinsteinEstimate>* estimate = nullptr) {
  if (g.dim() < 2) return 0.0;  // the Ricci tensor of a 1-manifold vanishes
  EinsteinEstimate e = einstein_check(g, plan, tol);
  const double lambda = e.lambda_hat;
  if (estimate) *estimate = std::move(e);
  return lambda;
}

}  // namespace

// ---------------------------------------------------------------------------
// Reports

ResidualReport make_report(std::string name, const std::vector<Point>& points,
                           const std::vector<double>& residuals, double tolerance,
                           bool keep_per_sample) {
  ResidualReport r;
  r.check_name = std::move(name);
  r.tolerance = tolerance;
  if (residuals.empty()) {
    r.passed = true;
    return r;
  }
  std::size_t arg = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double v = clean(residuals[i]);
    sum += v;
    if (v > clean(residuals[arg])) arg = i;
  }
  r.sup_residual = clean(residuals[arg]);
  r.mean_residual = sum / static_cast<double>(residuals.size());
  if (arg < points.size()) r.argmax_point = points[arg];
  if (keep_per_sample) r.per_sample = residuals;
  r.passed = r.sup_residual <= tolerance;
  return r;
}

ResidualReport scalar_report(std::string name, double residual, double tolerance) {
  return make_report(std::move(name), {}, {residual}, tolerance);
}

double normalized_sup(const Eigen::MatrixXd& t, const Eigen::MatrixXd& g) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      out = std::max(out, clean(std::abs(t(i, j)) / std::sqrt(g(i, i) * g(j, j))));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Einstein

EinsteinEstimate einstein_check(const MetricSpec& g, const SamplePlan& plan,
                                const Tolerances& tol) {
  const std::size_t n = g.dim();
  if (n < 2) throw Error(ErrorCode::Precondition, "einstein_check needs dimension >= 2");
  const CurvatureEngine engine(g);
  const std::vector<Point> points = sample(g.chart(), plan);

  std::vector<CurvatureData> data;
  data.reserve(points.size());
  Spread lambda;
  for (const Point& p : points) {
    data.push_back(engine.curvature(p));
    lambda.add(data.back().scalar / static_cast<double>(n));
  }

  EinsteinEstimate out;
  out.lambda_hat = lambda.mean();
  out.lambda_spread = lambda.width();
  std::vector<double> residuals;
  residuals.reserve(points.size());
  for (const CurvatureData& d : data) {
    residuals.push_back(normalized_sup(d.ricci - out.lambda_hat * d.metric, d.metric));
  }
  out.residual = make_report("einstein", points, residuals, tol.equality);
  out.passed = out.residual.passed &&
               out.lambda_spread <= tol.equality * (1.0 + std::abs(out.lambda_hat));
  if (n == 2) {
    out.notes.push_back(
        "dimension 2: every metric is pointwise Einstein; the verdict rests on the spread of s/n");
  }
  return out;
}

ConformalEinsteinResult conformally_einstein_check(const ConformalSpec& c, const SamplePlan& plan,
                                                   const Tolerances& tol) {
  ConformalEinsteinResult out;
  out.direct = einstein_check(conformal_metric(c, plan), plan, tol);
  out.lambda_estimated = !c.lambda_bar.has_value();
  out.lambda_bar = c.lambda_bar.value_or(out.direct.lambda_hat);

  const auto engine = std::make_shared<const CurvatureEngine>(c.base);
  const FieldEngine field(engine, c.phi);
  const double n = static_cast<double>(c.base.dim());
  const std::vector<Point> points = sample(c.base.chart(), plan);
  std::vector<double> residuals;
  residuals.reserve(points.size());
  for (const Point& p : points) {
    const CurvatureData cd = engine->curvature(p);
    const MetricJet mj = engine->jet(p, false);
    const FieldData f = field.at(mj, cd.christoffel, p);
    const double phi = f.phi.value;
    if (!(phi > 0.0)) {
      throw Error(ErrorCode::NonPositiveConformalFactor, "conformal factor is not positive");
    }
    const Eigen::MatrixXd e =
        cd.ricci + ((n - 2.0) / phi) * f.hessian -
        (f.laplacian / phi + ((n - 1.0) * f.grad_norm_sq + out.lambda_bar) / (phi * phi)) *
            cd.metric;
    // Normalizing against g-bar = g / phi^2 makes this the same quantity as
    // ric(g-bar) - lambda g-bar in the direct route.
    residuals.push_back(normalized_sup(e, cd.metric / (phi * phi)));
  }
  out.formula = make_report("conformally_einstein", points, residuals, tol.equality);
  out.passed = out.formula.passed;
  out.verdicts_agree = out.passed == out.direct.passed;
  return out;
}

// ---------------------------------------------------------------------------
// Mixed Ricci-flatness and the summand split

MixedRicciResult mixed_ricci_flat_check(const BlockMetricSpec& b, const Expr& phi,
                                        const SamplePlan& plan, const Tolerances& tol) {
  const std::size_t n = b.dim();
  const std::vector<Point> points = sample(b.joint().chart(), plan);
  const ExprJet jet(phi, n);

  std::vector<std::pair<std::size_t, std::size_t>> cross;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (b.factor_of(i) != b.factor_of(j)) cross.emplace_back(i, j);
    }
  }

  std::vector<Eigen::MatrixXd> hess;
  std::vector<double> residuals;
  bool positive = true;
  for (const Point& p : points) {
    const Jet2 j = jet.evaluate(p);
    positive = positive && j.value > 0.0;
    double r = 0.0;
    for (auto [a, c] : cross) r = std::max(r, std::abs(j.hessian(ix(a), ix(c))));
    residuals.push_back(r);
    hess.push_back(j.hessian);
  }

  MixedRicciResult out;
  out.hessian = make_report("mixed_ricci_flat", points, residuals, tol.equality);
  out.passed = out.hessian.passed;

  if (n > 2 && positive) {
    const CurvatureEngine bar(conformal_metric(ConformalSpec(b, phi), plan));
    std::vector<double> direct;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const CurvatureData cd = bar.curvature(points[k]);
      const double scale = evaluate(phi, points[k]) / static_cast<double>(n - 2);
      double r = 0.0;
      for (auto [a, c] : cross) {
        const double via_ricci = cd.ricci(ix(a), ix(c)) * scale;
        r = std::max(r, std::abs(via_ricci));
        out.route_discrepancy =
            std::max(out.route_discrepancy,
                     std::abs(via_ricci - hess[k](ix(a), ix(c))) /
                         (1.0 + std::abs(hess[k](ix(a), ix(c)))));
      }
      direct.push_back(r);
    }
    out.direct = make_report("mixed_ricci_flat.direct", points, direct, tol.equality);
    out.verdicts_agree = out.direct->passed == out.hessian.passed;
  }
  return out;
}

SplitResult split_factor(const BlockMetricSpec& b, const Expr& phi, std::optional<Point> anchor,
                         const SamplePlan& plan, const Tolerances& tol) {
  if (b.factor_count() != 2) {
    throw Error(ErrorCode::Precondition, "split_factor needs a two-factor product");
  }
  const std::vector<Point> points = sample(b.joint().chart(), plan);
  const Chart& c0 = b.factor(0).chart();
  const Chart& c1 = b.factor(1).chart();
  const std::size_t off = b.offset(1);

  SplitResult out;
  if (anchor) {
    if (anchor->size() != c0.dim()) throw Error(ErrorCode::Precondition, "anchor has wrong dimension");
    out.anchor = *anchor;
  } else {
    for (const Interval& d : c0.domain()) out.anchor.push_back(0.5 * (d.lo + d.hi));
  }
  out.probe = b.part(1, points.front());

  const Expr at_probe = replace_coordinates(phi, [&](const Expr& c) {
    return c.index() < off ? Expr::coordinate(c.index(), c0.names()[c.index()])
                           : Expr::constant(out.probe[c.index() - off]);
  });
  const double corner = evaluate(phi, b.join({out.anchor, out.probe}));
  out.phi1 = at_probe - corner;
  out.phi2 = replace_coordinates(phi, [&](const Expr& c) {
    return c.index() < off ? Expr::constant(out.anchor[c.index()])
                           : Expr::coordinate(c.index() - off, c1.names()[c.index() - off]);
  });

  std::vector<double> residuals;
  residuals.reserve(points.size());
  for (const Point& p : points) {
    const double v = evaluate(phi, p);
    const double split = evaluate(out.phi1, b.part(0, p)) + evaluate(out.phi2, b.part(1, p));
    residuals.push_back(std::abs(v - split) / std::max(1.0, std::abs(v)));
  }
  out.residual = make_report("split_factor", points, residuals, tol.equality);
  return out;
}

double sample_spread(const Expr& f, const Chart& chart, const SamplePlan& plan) {
  Spread s;
  for (const Point& p : sample(chart, plan)) s.add(evaluate(f, p));
  return s.width();
}

// ---------------------------------------------------------------------------
// Constant fitting

Lemma2Fit lemma2_fit(const MetricSpec& g1, const MetricSpec& g2, const Expr& phi1,
                     const Expr& phi2, const SamplePlan& plan, const Tolerances& tol) {
  const std::size_t n1 = g1.dim();
  const std::size_t n2 = g2.dim();
  const double n = static_cast<double>(n1 + n2);
  Lemma2Fit out;

  auto e1 = std::make_shared<const CurvatureEngine>(g1);
  auto e2 = std::make_shared<const CurvatureEngine>(g2);
  const std::vector<Point> x = sample(g1.chart(), plan);
  const std::vector<Point> y = sample(g2.chart(), plan);

  auto scalar_of = [&](const CurvatureEngine& e, const std::vector<Point>& pts, const char* which) {
    Spread s;
    for (const Point& p : pts) s.add(e.curvature(p).scalar);
    if (s.width() > tol.constancy * (1.0 + std::abs(s.mean()))) {
      throw Error(ErrorCode::Precondition,
                  std::string("factor ") + which + " does not have constant scalar curvature");
    }
    return s.mean();
  };
  const double s1 = scalar_of(*e1, x, "1");
  const double s2 = scalar_of(*e2, y, "2");
  out.s = s1 + s2;

  if (sample_spread(phi1, g1.chart(), plan) <= kConstantSummandSpread) {
    out.status = Lemma2Fit::Status::ConstantSummand;
    out.constant_summand = 0;
    return out;
  }
  if (sample_spread(phi2, g2.chart(), plan) <= kConstantSummandSpread) {
    out.status = Lemma2Fit::Status::ConstantSummand;
    out.constant_summand = 1;
    return out;
  }

  struct Samples {
    std::vector<double> phi, lap, grad2;
  };
  auto collect = [](const FieldEngine& f, const std::vector<Point>& pts) {
    Samples s;
    for (const Point& p : pts) {
      const FieldData d = f.at(p);
      s.phi.push_back(d.phi.value);
      s.lap.push_back(d.laplacian);
      s.grad2.push_back(d.grad_norm_sq);
    }
    return s;
  };
  const Samples f1 = collect(FieldEngine(e1, phi1), x);
  const Samples f2 = collect(FieldEngine(e2, phi2), y);

  const LinearFit fit1 = fit_line(f1.phi, f1.lap, ErrorCode::IllConditionedFit, "summand 1");
  const LinearFit fit2 = fit_line(f2.phi, f2.lap, ErrorCode::IllConditionedFit, "summand 2");
  out.a1 = fit1.slope;
  out.b1 = fit1.intercept;
  out.a2 = fit2.slope;
  out.b2 = fit2.intercept;

  auto fit_residuals = [](const Samples& s, const LinearFit& f) {
    std::vector<double> r;
    for (std::size_t i = 0; i < s.phi.size(); ++i) {
      r.push_back(std::abs(s.lap[i] - (f.slope * s.phi[i] + f.intercept)) /
                  (1.0 + std::abs(s.lap[i])));
    }
    return r;
  };
  out.checks.push_back(make_report("lemma2.laplacian_fit_1", x, fit_residuals(f1, fit1), tol.equality));
  out.checks.push_back(make_report("lemma2.laplacian_fit_2", y, fit_residuals(f2, fit2), tol.equality));

  std::vector<double> c1, c2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = f1.phi[i];
    c1.push_back((out.a2 - out.a1) * p * p - 2.0 * (out.b1 + out.b2) * p - n * f1.grad2[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = f2.phi[i];
    c2.push_back((out.a1 - out.a2) * p * p - 2.0 * (out.b1 + out.b2) * p - n * f2.grad2[i]);
  }
  out.c1 = std::accumulate(c1.begin(), c1.end(), 0.0) / static_cast<double>(c1.size());
  out.c2 = std::accumulate(c2.begin(), c2.end(), 0.0) / static_cast<double>(c2.size());
  out.checks.push_back(constancy_report("lemma2.c1_constant", x, c1, tol.constancy));
  out.checks.push_back(constancy_report("lemma2.c2_constant", y, c2, tol.constancy));

  out.checks.push_back(scalar_report("lemma2.scalar_identity",
                                     std::abs(out.s - (n - 1.0) * (out.a1 + out.a2)), tol.equality));

  const BlockMetricSpec prod = product(g1, g2);
  const Expr phi = prod.lift(0, phi1) + prod.lift(1, phi2);
  const CurvatureEngine bar(conformal_metric(ConformalSpec(prod, phi), plan));
  const std::vector<Point> joint = sample(prod.joint().chart(), plan);
  std::vector<double> sbar_res;
  Spread sbar;
  for (const Point& p : joint) {
    const double s = bar.curvature(p).scalar;
    sbar.add(s);
    sbar_res.push_back(std::abs(s - (n - 1.0) * (out.c1 + out.c2)));
  }
  out.s_bar = sbar.mean();
  out.checks.push_back(make_report("lemma2.conformal_scalar_identity", joint, sbar_res, tol.constancy));

  out.passed = std::all_of(out.checks.begin(), out.checks.end(),
                           [](const ResidualReport& r) { return r.passed; });
  return out;
}

// ---------------------------------------------------------------------------
// Case I: warped products

Case1Result case1_check(const WarpedSpec& w, const SamplePlan& plan, const Tolerances& tol) {
  const std::size_t p = w.fiber.dim();
  const double pd = static_cast<double>(p);
  Case1Result out;

  out.direct = einstein_check(warped_metric(w), plan, tol);
  out.lambda_bar = w.lambda_bar.value_or(out.direct.lambda_hat);
  out.lambda_fiber = w.lambda_fiber.value_or(lambda_of(w.fiber, plan, tol));

  {
    const CurvatureEngine fiber(w.fiber);
    const std::vector<Point> pts = sample(w.fiber.chart(), plan);
    std::vector<double> r;
    for (const Point& q : pts) {
      const CurvatureData cd = fiber.curvature(q);
      r.push_back(normalized_sup(cd.ricci - out.lambda_fiber * cd.metric, cd.metric));
    }
    out.checks.push_back(make_report("case1.fiber_einstein", pts, r, tol.equality));
  }

  require_positive(w.warp, w.base.chart(), plan, "warping function");
  const auto base = std::make_shared<const CurvatureEngine>(w.base);
  const FieldEngine warp(base, w.warp);
  const std::vector<Point> pts = sample(w.base.chart(), plan);
  std::vector<double> scalar_eq, tensor_eq;
  for (const Point& x : pts) {
    const CurvatureData cd = base->curvature(x);
    const MetricJet mj = base->jet(x, false);
    const FieldData f = warp.at(mj, cd.christoffel, x);
    const double fv = f.phi.value;
    scalar_eq.push_back(std::abs(fv * f.laplacian - (pd - 1.0) * f.grad_norm_sq +
                                 out.lambda_fiber - out.lambda_bar * fv * fv));
    const Eigen::MatrixXd t =
        fv * fv * cd.ricci - pd * fv * f.hessian - out.lambda_bar * fv * fv * cd.metric;
    tensor_eq.push_back(normalized_sup(t, cd.metric));
  }
  out.checks.push_back(make_report("case1.warp_scalar_equation", pts, scalar_eq, tol.equality));
  out.checks.push_back(make_report("case1.base_tensor_equation", pts, tensor_eq, tol.equality));

  out.passed = std::all_of(out.checks.begin(), out.checks.end(),
                           [](const ResidualReport& r) { return r.passed; });
  out.verdicts_agree = out.passed == out.direct.passed;
  return out;
}

// ---------------------------------------------------------------------------
// Case II: both summands non-constant

Case2Result case2_check(const MetricSpec& g1, const MetricSpec& g2, const Expr& phi1,
                        const Expr& phi2, const SamplePlan& plan, const Tolerances& tol) {
  const std::size_t n1 = g1.dim();
  const std::size_t n2 = g2.dim();
  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double n = dn1 + dn2;

  if (sample_spread(phi1, g1.chart(), plan) <= kConstantSummandSpread ||
      sample_spread(phi2, g2.chart(), plan) <= kConstantSummandSpread) {
    throw Error(ErrorCode::ConstantSummand, "case II needs two non-constant summands");
  }

  Case2Result out;
  Case2Constants& k = out.constants;
  auto e1 = std::make_shared<const CurvatureEngine>(g1);
  auto e2 = std::make_shared<const CurvatureEngine>(g2);
  const FieldEngine f1(e1, phi1);
  const FieldEngine f2(e2, phi2);
  const std::vector<Point> x = sample(g1.chart(), plan);
  const std::vector<Point> y = sample(g2.chart(), plan);

  std::vector<FieldData> d1, d2;
  std::vector<Eigen::MatrixXd> m1, m2;
  for (const Point& p : x) {
    d1.push_back(f1.at(p));
    m1.push_back(g1.evaluate(p));
  }
  for (const Point& p : y) {
    d2.push_back(f2.at(p));
    m2.push_back(g2.evaluate(p));
  }

  // Hessian proportionality of phi1: Delta phi1 / n1 = a_bar phi1 + b_bar.
  {
    std::vector<double> phi, mu;
    for (const FieldData& d : d1) {
      phi.push_back(d.phi.value);
      mu.push_back(d.laplacian / dn1);
    }
    const LinearFit fit = fit_line(phi, mu, ErrorCode::FitFailure, "Hessian proportionality");
    k.a_bar = fit.slope;
    k.b_bar = fit.intercept;
  }

  std::vector<double> r1, r2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double target = -(k.a_bar * d1[i].phi.value + k.b_bar);
    r1.push_back(normalized_sup(d1[i].hessian - target * m1[i], m1[i]));
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double target = k.a_bar * d2[i].phi.value - k.b_bar;
    r2.push_back(normalized_sup(d2[i].hessian - target * m2[i], m2[i]));
  }
  out.checks.push_back(make_report("case2.hessian_phi1", x, r1, tol.equality));
  out.checks.push_back(make_report("case2.hessian_phi2", y, r2, tol.equality));
  out.notes.push_back(
      "the Hessian condition on the second summand is checked as "
      "nabla d phi2 = (a_bar phi2 - b_bar) g2");

  std::optional<EinsteinEstimate> est1, est2;
  k.lambda_1 = lambda_of(g1, plan, tol, &est1);
  k.lambda_2 = lambda_of(g2, plan, tol, &est2);
  auto einstein_report = [](const char* name, const std::optional<EinsteinEstimate>& est, double t) {
    if (!est) return scalar_report(name, 0.0, t);
    ResidualReport r = est->residual;
    r.check_name = name;
    if (!est->passed) r.passed = false;
    return r;
  };
  out.checks.push_back(einstein_report("case2.g1_einstein", est1, tol.equality));
  out.checks.push_back(einstein_report("case2.g2_einstein", est2, tol.equality));
  out.checks.push_back(scalar_report("case2.lambda1_relation",
                                     std::abs(k.lambda_1 - (dn1 - 1.0) * k.a_bar), tol.equality));
  out.checks.push_back(scalar_report("case2.lambda2_relation",
                                     std::abs(k.lambda_2 + (dn2 - 1.0) * k.a_bar), tol.equality));

  std::vector<double> cb1, cb2;
  for (const FieldData& d : d1) {
    const double p = d.phi.value;
    cb1.push_back(-(d.grad_norm_sq + k.a_bar * p * p + 2.0 * k.b_bar * p));
  }
  for (const FieldData& d : d2) {
    const double p = d.phi.value;
    cb2.push_back(-(d.grad_norm_sq - k.a_bar * p * p + 2.0 * k.b_bar * p));
  }
  k.c_bar_1 = std::accumulate(cb1.begin(), cb1.end(), 0.0) / static_cast<double>(cb1.size());
  k.c_bar_2 = std::accumulate(cb2.begin(), cb2.end(), 0.0) / static_cast<double>(cb2.size());
  k.c_bar_sum_unsigned = -(k.c_bar_1 + k.c_bar_2);
  out.checks.push_back(constancy_report("case2.cbar1_constant", x, cb1, tol.constancy));
  out.checks.push_back(constancy_report("case2.cbar2_constant", y, cb2, tol.constancy));

  const BlockMetricSpec prod = product(g1, g2);
  const Expr phi = prod.lift(0, phi1) + prod.lift(1, phi2);
  out.direct = einstein_check(conformal_metric(ConformalSpec(prod, phi), plan), plan, tol);
  k.rho_bar = out.direct.lambda_hat / (n - 1.0);
  out.checks.push_back(scalar_report("case2.cbar_sum_equals_rho",
                                     std::abs(k.c_bar_1 + k.c_bar_2 - k.rho_bar), tol.constancy));
  out.notes.push_back(
      "c_bar_i use the convention |d phi_i|^2 +- a_bar phi_i^2 + 2 b_bar phi_i + c_bar_i = 0; "
      "c_bar_sum_unsigned reports the sum with the opposite sign");

  try {
    out.lemma2 = lemma2_fit(g1, g2, phi1, phi2, plan, tol);
  } catch (const Error& e) {
    out.notes.push_back(std::string("constant fit unavailable: ") + e.what());
    out.checks.push_back(scalar_report("case2.lemma2_preconditions",
                                       std::numeric_limits<double>::infinity(), tol.equality));
  }
  if (out.lemma2 && out.lemma2->status == Lemma2Fit::Status::Ok) {
    const Lemma2Fit& l = *out.lemma2;
    k.c_sum_lemma2 = l.c1 + l.c2;
    if (n > 2.0) {
      const double m = n - 2.0;
      out.checks.push_back(scalar_report(
          "case2.lambda1_shift", std::abs(k.lambda_1 / m - l.a1 / dn1 - k.lambda_2 / m), tol.equality));
      out.checks.push_back(scalar_report(
          "case2.lambda2_shift", std::abs(k.lambda_2 / m - l.a2 / dn2 - k.lambda_1 / m), tol.equality));
    } else {
      out.notes.push_back("dimension 2: the lambda relations divide by n - 2 and are skipped");
    }
    out.checks.push_back(
        scalar_report("case2.b_ratio", std::abs(l.b1 / dn1 - l.b2 / dn2), tol.equality));
    const double s1 = dn1 * k.lambda_1;
    const double s2 = dn2 * k.lambda_2;
    out.checks.push_back(
        scalar_report("case2.scalar1_split", std::abs(s1 - (dn1 - 1.0) * l.a1), tol.equality));
    out.checks.push_back(
        scalar_report("case2.scalar2_split", std::abs(s2 - (dn2 - 1.0) * l.a2), tol.equality));
    out.checks.push_back(
        scalar_report("case2.scalar_balance", std::abs(dn2 * l.a1 + dn1 * l.a2), tol.equality));
  }

  out.passed = std::all_of(out.checks.begin(), out.checks.end(),
                           [](const ResidualReport& r) { return r.passed; });
  out.verdicts_agree = out.passed == out.direct.passed;
  return out;
}

// ---------------------------------------------------------------------------
// Hessian equation for the first summand

Lemma3Result lemma3_check(const MetricSpec& g1, const MetricSpec& g2, const Expr& phi1,
                          const Expr& phi2, const SamplePlan& plan, const Tolerances& tol) {
  if (sample_spread(phi2, g2.chart(), plan) <= kConstantSummandSpread) {
    throw Error(ErrorCode::Precondition, "the second summand must be non-constant");
  }
  const double n = static_cast<double>(g1.dim() + g2.dim());
  if (!(n > 2.0)) throw Error(ErrorCode::Precondition, "needs total dimension >= 3");

  Lemma3Result out;
  std::optional<EinsteinEstimate> est1;
  out.lambda_1 = lambda_of(g1, plan, tol, &est1);
  if (est1) {
    ResidualReport r = est1->residual;
    r.check_name = "lemma3.g1_einstein";
    r.passed = est1->passed;
    out.checks.push_back(std::move(r));
  } else {
    out.checks.push_back(scalar_report("lemma3.g1_einstein", 0.0, tol.equality));
  }

  const BlockMetricSpec prod = product(g1, g2);
  const Expr phi = prod.lift(0, phi1) + prod.lift(1, phi2);
  out.lambda_bar =
      einstein_check(conformal_metric(ConformalSpec(prod, phi), plan), plan, tol).lambda_hat;

  const auto joint = std::make_shared<const CurvatureEngine>(prod.joint());
  const FieldEngine full(joint, phi);
  const FieldEngine first(std::make_shared<const CurvatureEngine>(g1), phi1);
  const std::vector<Point> pts = sample(prod.joint().chart(), plan);
  std::vector<double> r;
  for (const Point& p : pts) {
    const FieldData f = full.at(p);
    const Point xp = prod.part(0, p);
    const FieldData h = first.at(xp);
    const Eigen::MatrixXd g = g1.evaluate(xp);
    const double v = f.phi.value;
    const double coeff = (out.lambda_bar / v - out.lambda_1 * v + f.laplacian +
                          (n - 1.0) * f.grad_norm_sq / v) /
                         (n - 2.0);
    r.push_back(normalized_sup(h.hessian - coeff * g, g));
  }
  out.checks.push_back(make_report("lemma3.hessian_equation", pts, r, tol.equality));
  out.passed = std::all_of(out.checks.begin(), out.checks.end(),
                           [](const ResidualReport& c) { return c.passed; });
  return out;
}

// ---------------------------------------------------------------------------
// The dichotomy

DichotomyResult dichotomy_check(const BlockMetricSpec& b, const Expr& phi, const SamplePlan& plan,
                              const Tolerances& tol, std::optional<Point> anchor) {
  if (b.factor_count() != 2) {
    throw Error(ErrorCode::Precondition, "dichotomy_check needs a two-factor product");
  }
  DichotomyResult out;
  out.direct = einstein_check(conformal_metric(ConformalSpec(b, phi), plan), plan, tol);
  out.mixed = mixed_ricci_flat_check(b, phi, plan, tol);
  if (!out.mixed.passed) {
    out.route = "not_mixed_ricci_flat";
    out.passed = false;
    out.verdicts_agree = out.passed == out.direct.passed;
    return out;
  }

  out.split = split_factor(b, phi, std::move(anchor), plan, tol);
  const MetricSpec& g1 = b.factor(0);
  const MetricSpec& g2 = b.factor(1);
  const double spread1 = sample_spread(out.split->phi1, g1.chart(), plan);
  const double spread2 = sample_spread(out.split->phi2, g2.chart(), plan);

  if (spread1 <= kConstantSummandSpread || spread2 <= kConstantSummandSpread) {
    out.route = "case_I";
    // phi lives on one factor; that factor, rescaled, is the warped base.
    const bool first_varies = spread2 <= kConstantSummandSpread;
    const MetricSpec& base = first_varies ? g1 : g2;
    const MetricSpec& fiber = first_varies ? g2 : g1;
    const Expr& varying = first_varies ? out.split->phi1 : out.split->phi2;
    const Expr& fixed = first_varies ? out.split->phi2 : out.split->phi1;
    const std::vector<Point> fixed_pts = sample((first_varies ? g2 : g1).chart(), plan);
    const Expr restricted = varying + evaluate(fixed, fixed_pts.front());
    WarpedSpec w{conformal_metric(ConformalSpec(base, restricted), plan), fiber, 1.0 / restricted,
                 std::nullopt, std::nullopt};
    out.case1 = case1_check(w, plan, tol);
    out.passed = out.case1->passed;
  } else {
    out.route = "case_II";
    out.case2 = case2_check(g1, g2, out.split->phi1, out.split->phi2, plan, tol);
    out.passed = out.case2->passed;
  }
  out.verdicts_agree = out.passed == out.direct.passed;
  return out;
}

// ---------------------------------------------------------------------------
// Formula route versus direct curvature

OracleResult conformal_oracle_check(const ConformalSpec& c, const SamplePlan& plan,
                                    double tolerance) {
  const CurvatureEngine bar(conformal_metric(c, plan));
  const ConformalFormulas formulas(c);
  const std::size_t n = c.base.dim();
  const std::vector<Point> pts = sample(c.base.chart(), plan);
  std::vector<double> ric_r, s_r, conn_r;
  for (const Point& p : pts) {
    const CurvatureData d = bar.curvature(p);
    const Eigen::MatrixXd ric = formulas.ricci(p);
    double r = 0.0;
    for (Eigen::Index i = 0; i < ric.rows(); ++i) {
      for (Eigen::Index j = 0; j < ric.cols(); ++j) {
        r = std::max(r, clean(std::abs(ric(i, j) - d.ricci(i, j)) / (1.0 + std::abs(d.ricci(i, j)))));
      }
    }
    ric_r.push_back(r);
    s_r.push_back(std::abs(formulas.scalar(p) - d.scalar) / (1.0 + std::abs(d.scalar)));
    double cr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const Eigen::VectorXd v = formulas.connection(i, j, p);
        for (std::size_t k = 0; k < n; ++k) {
          const double direct = d.christoffel(k, i, j);
          cr = std::max(cr, clean(std::abs(v[ix(k)] - direct) / (1.0 + std::abs(direct))));
        }
      }
    }
    conn_r.push_back(cr);
  }
  return {make_report("oracle.ricci", pts, ric_r, tolerance),
          make_report("oracle.scalar", pts, s_r, tolerance),
          make_report("oracle.connection", pts, conn_r, tolerance)};
}

// ---------------------------------------------------------------------------
// Doubly twisted metrics

WarpedFormResult warped_form_check(const DoublyTwistedSpec& d, const SamplePlan& plan,
                                   const Tolerances& tol) {
  const Chart joint = joint_chart(d.base.chart(), d.fiber.chart());
  const std::size_t n = joint.dim();
  const std::size_t q = d.base.dim();
  const ExprJet b(d.b, n);
  const ExprJet f(d.f, n);
  const std::vector<Point> pts = sample(joint, plan);
  std::vector<double> db, df_fiber, df, db_base;
  for (const Point& p : pts) {
    const Jet2 jb = b.evaluate(p);
    const Jet2 jf = f.evaluate(p);
    db.push_back(jb.gradient.cwiseAbs().maxCoeff());
    df.push_back(jf.gradient.cwiseAbs().maxCoeff());
    df_fiber.push_back(jf.gradient.tail(ix(n - q)).cwiseAbs().maxCoeff());
    db_base.push_back(jb.gradient.head(ix(q)).cwiseAbs().maxCoeff());
  }
  WarpedFormResult out;
  out.base_scale_constant = make_report("warped_form.base_scale_constant", pts, db, tol.equality);
  out.warp_on_base = make_report("warped_form.warp_on_base", pts, df_fiber, tol.equality);
  out.swapped_base_scale = make_report("warped_form.swapped_base_scale_constant", pts, df, tol.equality);
  out.swapped_warp_on_base = make_report("warped_form.swapped_warp_on_base", pts, db_base, tol.equality);
  out.passed = (out.base_scale_constant.passed && out.warp_on_base.passed) ||
               (out.swapped_base_scale.passed && out.swapped_warp_on_base.passed);
  return out;
}

ResidualReport metric_identity_check(std::string name, const MetricSpec& a, const MetricSpec& b,
                                     const SamplePlan& plan, double tolerance) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::Precondition, "metrics have different dimensions");
  const std::vector<Point> pts = sample(a.chart(), plan);
  std::vector<double> r;
  for (const Point& p : pts) r.push_back((a.evaluate(p) - b.evaluate(p)).cwiseAbs().maxCoeff());
  return make_report(std::move(name), pts, r, tolerance);
}

}  // namespace confein
