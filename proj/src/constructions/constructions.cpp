#include "confein/constructions.hpp"

#include "confein/errors.hpp"

#include <sstream>

namespace confein {
namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

Chart concat_charts(const std::vector<const Chart*>& charts) {
  std::vector<std::string> names;
  std::vector<Interval> domain;
  double margin = 0.0;
  for (std::size_t f = 0; f < charts.size(); ++f) {
    for (const auto& n : charts[f]->names()) names.push_back(BlockMetricSpec::prefix(f) + n);
    for (const auto& d : charts[f]->domain()) domain.push_back(d);
    margin = std::max(margin, charts[f]->singular_margin());
  }
  return Chart(std::move(names), std::move(domain), margin);
}

// Block-diagonal metric on a joint chart with per-block scale expressions
// (already on the joint chart). An absent scale means 1.
MetricSpec block_metric(const Chart& joint, const std::vector<const MetricSpec*>& blocks,
                        const std::vector<std::optional<Expr>>& scales) {
  const std::size_t n = joint.dim();
  std::vector<Expr> entries(n * n, Expr::constant(0.0));
  std::size_t offset = 0;
  for (std::size_t f = 0; f < blocks.size(); ++f) {
    const MetricSpec& g = *blocks[f];
    const std::string prefix = BlockMetricSpec::prefix(f);
    for (std::size_t i = 0; i < g.dim(); ++i) {
      for (std::size_t j = i; j < g.dim(); ++j) {
        Expr e = shift_coordinates(g.entry(i, j), offset, prefix);
        if (scales[f] && !e.is_constant(0.0)) e = *scales[f] * e;
        entries[(offset + i) * n + offset + j] = e;
        entries[(offset + j) * n + offset + i] = e;
      }
    }
    offset += g.dim();
  }
  return MetricSpec(joint, std::move(entries));
}

std::vector<std::optional<Expr>> no_scales(std::size_t n) {
  return std::vector<std::optional<Expr>>(n);
}

std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockMetricSpec

BlockMetricSpec::BlockMetricSpec(std::vector<MetricSpec> factors)
    : factors_(std::move(factors)),
      joint_([this] {
        if (factors_.size() < 2) {
          throw Error(ErrorCode::Precondition, "a product needs at least two factors");
        }
        std::vector<const Chart*> charts;
        std::vector<const MetricSpec*> blocks;
        for (const auto& g : factors_) {
          charts.push_back(&g.chart());
          blocks.push_back(&g);
        }
        return block_metric(concat_charts(charts), blocks, no_scales(blocks.size()));
      }()) {
  std::size_t offset = 0;
  for (const auto& g : factors_) {
    offsets_.push_back(offset);
    offset += g.dim();
  }
  offsets_.push_back(offset);
}

std::size_t BlockMetricSpec::factor_of(std::size_t joint_index) const {
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (joint_index < offsets_[f + 1]) return f;
  }
  throw Error(ErrorCode::Precondition, "coordinate index outside the joint chart");
}

std::string BlockMetricSpec::prefix(std::size_t f) { return "f" + std::to_string(f) + "."; }

Expr BlockMetricSpec::lift(std::size_t f, const Expr& e) const {
  if (e.arity() > factor(f).dim()) {
    throw Error(ErrorCode::Precondition, "expression does not live on factor " + std::to_string(f));
  }
  return shift_coordinates(e, offsets_[f], prefix(f));
}

Point BlockMetricSpec::join(const std::vector<Point>& parts) const {
  if (parts.size() != factors_.size()) throw Error(ErrorCode::Precondition, "wrong number of parts");
  Point out;
  out.reserve(dim());
  for (std::size_t f = 0; f < parts.size(); ++f) {
    if (parts[f].size() != factors_[f].dim()) {
      throw Error(ErrorCode::Precondition, "part " + std::to_string(f) + " has wrong dimension");
    }
    out.insert(out.end(), parts[f].begin(), parts[f].end());
  }
  return out;
}

Point BlockMetricSpec::part(std::size_t f, std::span<const double> joint_point) const {
  return Point(joint_point.begin() + static_cast<std::ptrdiff_t>(offsets_.at(f)),
               joint_point.begin() + static_cast<std::ptrdiff_t>(offsets_.at(f + 1)));
}

BlockMetricSpec product(const MetricSpec& g1, const MetricSpec& g2) {
  return BlockMetricSpec({g1, g2});
}

// ---------------------------------------------------------------------------
// Conformal change

void require_positive(const Expr& f, const Chart& chart, const SamplePlan& plan,
                      const std::string& what) {
  for (const Point& p : sample(chart, plan)) {
    const double v = evaluate(f, p);
    if (!(v > 0.0)) {
      throw Error(ErrorCode::NonPositiveConformalFactor,
                  what + " is not positive at " + format_point(p) + " (value " +
                      std::to_string(v) + ")");
    }
  }
}

MetricSpec conformal_metric(const ConformalSpec& c, const SamplePlan& plan) {
  const std::size_t n = c.base.dim();
  if (c.phi.arity() > n) {
    throw Error(ErrorCode::Precondition, "conformal factor references a coordinate outside the chart");
  }
  require_positive(c.phi, c.base.chart(), plan, "conformal factor");
  const Expr scale = pow(c.phi, -2.0);
  std::vector<Expr> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Expr& g = c.base.entry(i, j);
      Expr e = g.is_constant(0.0) ? g : scale * g;
      entries[i * n + j] = e;
      entries[j * n + i] = e;
    }
  }
  return MetricSpec(c.base.chart(), std::move(entries));
}

ConformalFormulas::ConformalFormulas(const ConformalSpec& c)
    : metric_(std::make_shared<const CurvatureEngine>(c.base)), field_(metric_, c.phi) {}

double ConformalFormulas::checked_phi(std::span<const double> point, double value) const {
  if (!(value > 0.0)) {
    throw Error(ErrorCode::NonPositiveConformalFactor,
                "conformal factor is not positive at " + format_point(point));
  }
  return value;
}

Eigen::MatrixXd ConformalFormulas::ricci(std::span<const double> point) const {
  const CurvatureData base = metric_->curvature(point);
  const MetricJet mj = metric_->jet(point, false);
  const FieldData f = field_.at(mj, base.christoffel, point);
  const double phi = checked_phi(point, f.phi.value);
  const double n = static_cast<double>(dim());
  return base.ricci + ((n - 2.0) / phi) * f.hessian -
         (f.laplacian / phi + (n - 1.0) * f.grad_norm_sq / (phi * phi)) * base.metric;
}

double ConformalFormulas::scalar(std::span<const double> point) const {
  const CurvatureData base = metric_->curvature(point);
  const MetricJet mj = metric_->jet(point, false);
  const FieldData f = field_.at(mj, base.christoffel, point);
  const double phi = checked_phi(point, f.phi.value);
  const double n = static_cast<double>(dim());
  return phi * phi * base.scalar - 2.0 * (n - 1.0) * phi * f.laplacian -
         n * (n - 1.0) * f.grad_norm_sq;
}

Eigen::VectorXd ConformalFormulas::connection(std::size_t i, std::size_t j,
                                              std::span<const double> point) const {
  const MetricJet mj = metric_->jet(point, false);
  const Christoffel gamma = CurvatureEngine::christoffel_from(mj);
  const FieldData f = field_.at(mj, gamma, point);
  const double phi = checked_phi(point, f.phi.value);
  const std::size_t n = dim();
  Eigen::VectorXd out(ix(n));
  for (std::size_t k = 0; k < n; ++k) {
    double v = gamma(k, i, j);
    if (k == j) v -= f.phi.gradient[ix(i)] / phi;
    if (k == i) v -= f.phi.gradient[ix(j)] / phi;
    v += mj.g(ix(i), ix(j)) * f.gradient[ix(k)] / phi;
    out[ix(k)] = v;
  }
  return out;
}

Eigen::MatrixXd conformal_ricci_formula(const ConformalSpec& c, std::span<const double> point) {
  return ConformalFormulas(c).ricci(point);
}

double conformal_scalar_formula(const ConformalSpec& c, std::span<const double> point) {
  return ConformalFormulas(c).scalar(point);
}

Eigen::VectorXd conformal_connection(const ConformalSpec& c, std::size_t i, std::size_t j,
                                     std::span<const double> point) {
  return ConformalFormulas(c).connection(i, j, point);
}

// ---------------------------------------------------------------------------
// Warped and twisted products

Chart joint_chart(const Chart& base, const Chart& fiber) { return concat_charts({&base, &fiber}); }

MetricSpec warped_metric(const WarpedSpec& w) {
  if (w.warp.arity() > w.base.dim()) {
    throw Error(ErrorCode::Precondition, "warping function must live on the base chart");
  }
  const Expr f = shift_coordinates(w.warp, 0, BlockMetricSpec::prefix(0));
  return block_metric(joint_chart(w.base.chart(), w.fiber.chart()), {&w.base, &w.fiber},
                      {std::nullopt, pow(f, 2.0)});
}

MetricSpec twisted_metric(const MetricSpec& base, const Expr& f, const MetricSpec& fiber) {
  const Chart joint = joint_chart(base.chart(), fiber.chart());
  if (f.arity() > joint.dim()) {
    throw Error(ErrorCode::Precondition, "twisting function references a coordinate outside the chart");
  }
  return block_metric(joint, {&base, &fiber}, {std::nullopt, pow(f, 2.0)});
}

MetricSpec doubly_twisted_metric(const DoublyTwistedSpec& d) {
  const Chart joint = joint_chart(d.base.chart(), d.fiber.chart());
  if (d.b.arity() > joint.dim() || d.f.arity() > joint.dim()) {
    throw Error(ErrorCode::Precondition, "scale functions reference a coordinate outside the chart");
  }
  return block_metric(joint, {&d.base, &d.fiber}, {pow(d.b, 2.0), pow(d.f, 2.0)});
}

ConformalSpec warped_conformal_form(const WarpedSpec& w) {
  // f^-2 g_B is the conformal metric of g_B with factor f.
  BlockMetricSpec blocks = product(conformal_metric(ConformalSpec(w.base, w.warp)), w.fiber);
  Expr phi = 1.0 / blocks.lift(0, w.warp);
  ConformalSpec out(std::move(blocks), std::move(phi));
  out.lambda_bar = w.lambda_bar;
  return out;
}

ConformalSpec split_twisted_conformal_form(const MetricSpec& base, const Expr& f1, const Expr& f2,
                                           const MetricSpec& fiber) {
  const MetricSpec scaled_base = conformal_metric(ConformalSpec(base, f1));
  const MetricSpec scaled_fiber = conformal_metric(ConformalSpec(fiber, 1.0 / f2));
  BlockMetricSpec blocks = product(scaled_base, scaled_fiber);
  Expr phi = 1.0 / blocks.lift(0, f1);
  return ConformalSpec(std::move(blocks), std::move(phi));
}

}  // namespace confein
