#pragma once

// Builders for product, warped, twisted and conformally rescaled metrics, and
// the closed-form conformal curvature formulas. The formulas are evaluated
// from the base metric and the conformal factor only; they never look at the
// rescaled metric, so comparing them with curvature(conformal_metric(c)) is a
// genuine two-route check.

#include "confein/geometry.hpp"
#include "confein/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace confein {

// Product of factor metrics on the concatenated chart. Factor f's coordinates
// are renamed "f<f>.<name>" and occupy joint indices [offset(f), offset(f+1)).
class BlockMetricSpec {
 public:
  explicit BlockMetricSpec(std::vector<MetricSpec> factors);

  const std::vector<MetricSpec>& factors() const { return factors_; }
  const MetricSpec& factor(std::size_t f) const { return factors_.at(f); }
  std::size_t factor_count() const { return factors_.size(); }
  const MetricSpec& joint() const { return joint_; }
  std::size_t dim() const { return joint_.dim(); }

  std::size_t offset(std::size_t f) const { return offsets_.at(f); }
  std::size_t factor_of(std::size_t joint_index) const;
  static std::string prefix(std::size_t f);

  // Factor-local expression rewritten on the joint chart.
  Expr lift(std::size_t f, const Expr& e) const;
  // Factor-local points concatenated into a joint point, and back.
  Point join(const std::vector<Point>& parts) const;
  Point part(std::size_t f, std::span<const double> joint_point) const;

 private:
  std::vector<MetricSpec> factors_;
  std::vector<std::size_t> offsets_;
  MetricSpec joint_;
};

BlockMetricSpec product(const MetricSpec& g1, const MetricSpec& g2);

// g-bar = phi^-2 g.
struct ConformalSpec {
  MetricSpec base;
  Expr phi;
  std::optional<BlockMetricSpec> blocks;
  std::optional<double> lambda_bar;

  ConformalSpec(MetricSpec base_metric, Expr factor)
      : base(std::move(base_metric)), phi(std::move(factor)) {}
  ConformalSpec(BlockMetricSpec block_metric, Expr factor)
      : base(block_metric.joint()), phi(std::move(factor)), blocks(std::move(block_metric)) {}
};

// Entries phi^-2 g_ij as expressions. phi is checked positive on the sample
// set; NonPositiveConformalFactor reports the first failing point.
MetricSpec conformal_metric(const ConformalSpec& c, const SamplePlan& plan = {});

void require_positive(const Expr& f, const Chart& chart, const SamplePlan& plan,
                      const std::string& what);

// Curvature of phi^-2 g expressed through ric(g), s(g) and the Hessian,
// Laplacian and gradient of phi on the base metric.
class ConformalFormulas {
 public:
  explicit ConformalFormulas(const ConformalSpec& c);

  std::size_t dim() const { return metric_->dim(); }

  Eigen::MatrixXd ricci(std::span<const double> point) const;
  double scalar(std::span<const double> point) const;
  // Components of nabla-bar_{d_i} d_j.
  Eigen::VectorXd connection(std::size_t i, std::size_t j, std::span<const double> point) const;

 private:
  double checked_phi(std::span<const double> point, double value) const;

  std::shared_ptr<const CurvatureEngine> metric_;
  FieldEngine field_;
};

Eigen::MatrixXd conformal_ricci_formula(const ConformalSpec& c, std::span<const double> point);
double conformal_scalar_formula(const ConformalSpec& c, std::span<const double> point);
Eigen::VectorXd conformal_connection(const ConformalSpec& c, std::size_t i, std::size_t j,
                                     std::span<const double> point);

// g-bar = g_B + f^2 g_F with f on the base chart.
struct WarpedSpec {
  MetricSpec base;
  MetricSpec fiber;
  Expr warp;
  std::optional<double> lambda_fiber;
  std::optional<double> lambda_bar;
};

// g-bar = b^2 g_B + f^2 g_F with b, f on the joint chart (base first).
struct DoublyTwistedSpec {
  MetricSpec base;
  MetricSpec fiber;
  Expr b;
  Expr f;
};

// Joint chart of a (base, fiber) pair; same naming as BlockMetricSpec.
Chart joint_chart(const Chart& base, const Chart& fiber);

MetricSpec warped_metric(const WarpedSpec& w);
MetricSpec twisted_metric(const MetricSpec& base, const Expr& f, const MetricSpec& fiber);
MetricSpec doubly_twisted_metric(const DoublyTwistedSpec& d);

// The conformal description of a warped product: phi = 1/f on the product
// f^-2 g_B + g_F.
ConformalSpec warped_conformal_form(const WarpedSpec& w);

// For a twist f = f1(x) f2(y): phi = 1/f1 on the product f1^-2 g_B + f2^2 g_F.
ConformalSpec split_twisted_conformal_form(const MetricSpec& base, const Expr& f1,
                                           const Expr& f2, const MetricSpec& fiber);

}  // namespace confein
