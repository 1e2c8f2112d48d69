#pragma once

// Residual checks over deterministic sample sets. Every check reduces a
// pointwise residual to sup/mean over the samples and judges the sup against
// a tolerance. Tensor residuals T are measured in the metric-normalized
// entrywise norm max_ij |T_ij| / sqrt(g_ii g_jj), which is invariant under
// rescaling individual coordinates.

#include "confein/constructions.hpp"
#include "confein/geometry.hpp"
#include "confein/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace confein {

struct Tolerances {
  double equality = 1e-8;   // absolute, on O(1)-normalized residuals
  double constancy = 1e-6;  // (max - min) <= constancy * (1 + |mean|)
};

struct ResidualReport {
  std::string check_name;
  double sup_residual = 0.0;
  double mean_residual = 0.0;
  Point argmax_point;
  std::vector<double> per_sample;  // filled only when requested
  double tolerance = 0.0;
  bool passed = false;
};

// NaN residuals count as infinite.
ResidualReport make_report(std::string name, const std::vector<Point>& points,
                           const std::vector<double>& residuals, double tolerance,
                           bool keep_per_sample = false);
ResidualReport scalar_report(std::string name, double residual, double tolerance);

double normalized_sup(const Eigen::MatrixXd& t, const Eigen::MatrixXd& g);

struct EinsteinEstimate {
  double lambda_hat = 0.0;     // mean of pointwise s/n
  double lambda_spread = 0.0;  // max - min of pointwise s/n
  ResidualReport residual;     // |ric - lambda_hat g|
  bool passed = false;         // residual passes and spread <= tolerance (1 + |lambda|)
  std::vector<std::string> notes;
};

// Requires dim >= 2; a 2-dimensional metric is always pointwise Einstein, so
// there the spread carries the verdict.
EinsteinEstimate einstein_check(const MetricSpec& g, const SamplePlan& plan,
                                const Tolerances& tol = {});

// Conformally-Einstein equation for (g, phi) evaluated from the base metric,
// cross-checked against the direct Einstein verdict of phi^-2 g.
struct ConformalEinsteinResult {
  double lambda_bar = 0.0;
  bool lambda_estimated = false;
  ResidualReport formula;   // residual in g-bar-normalized form
  EinsteinEstimate direct;  // einstein_check(conformal_metric(c))
  bool passed = false;
  bool verdicts_agree = false;
};

ConformalEinsteinResult conformally_einstein_check(const ConformalSpec& c, const SamplePlan& plan,
                                                   const Tolerances& tol = {});

// Cross-factor second derivatives of phi, and the cross-factor block of
// ric(phi^-2 g) rescaled by phi / (n - 2) as an independent route.
struct MixedRicciResult {
  ResidualReport hessian;
  std::optional<ResidualReport> direct;  // absent when n = 2 or phi <= 0 somewhere
  double route_discrepancy = 0.0;        // sup |hessian route - direct route|
  bool passed = false;
  bool verdicts_agree = true;
};

MixedRicciResult mixed_ricci_flat_check(const BlockMetricSpec& b, const Expr& phi,
                                        const SamplePlan& plan, const Tolerances& tol = {});

// phi1(x) = phi(x, y_probe) - phi(x0, y_probe), phi2(y) = phi(x0, y), with
// y_probe the factor-2 part of the first sample. Both summands are returned
// as expressions on their own factor charts; phi1(x0) = 0.
struct SplitResult {
  Expr phi1;
  Expr phi2;
  Point anchor;
  Point probe;
  ResidualReport residual;  // |phi - phi1 - phi2| / max(1, |phi|)
};

SplitResult split_factor(const BlockMetricSpec& b, const Expr& phi,
                         std::optional<Point> anchor, const SamplePlan& plan,
                         const Tolerances& tol = {});

// Spread of a function over a chart's samples; used to classify summands.
double sample_spread(const Expr& f, const Chart& chart, const SamplePlan& plan);
constexpr double kConstantSummandSpread = 1e-8;

struct Lemma2Fit {
  enum class Status { Ok, ConstantSummand };
  Status status = Status::Ok;
  int constant_summand = -1;  // 0 or 1 when status is ConstantSummand
  double a1 = 0, b1 = 0, c1 = 0, a2 = 0, b2 = 0, c2 = 0;
  double s = 0.0;      // s(g1) + s(g2)
  double s_bar = 0.0;  // mean scalar curvature of phi^-2 (g1 + g2)
  std::vector<ResidualReport> checks;
  bool passed = false;
};

// Least-squares fit of Delta_i phi_i = a_i phi_i + b_i on each factor, the
// constants c_i and the two scalar-curvature identities. Throws
// Error(Precondition) when a factor lacks constant scalar curvature and
// IllConditionedFit when phi_i is numerically constant relative to its size.
Lemma2Fit lemma2_fit(const MetricSpec& g1, const MetricSpec& g2, const Expr& phi1,
                     const Expr& phi2, const SamplePlan& plan, const Tolerances& tol = {});

struct Case1Result {
  double lambda_fiber = 0.0;
  double lambda_bar = 0.0;
  std::vector<ResidualReport> checks;  // fiber Einstein, warp scalar equation, base tensor equation
  EinsteinEstimate direct;             // einstein_check(warped_metric(w))
  bool passed = false;
  bool verdicts_agree = false;
};

Case1Result case1_check(const WarpedSpec& w, const SamplePlan& plan, const Tolerances& tol = {});

struct Case2Constants {
  double a_bar = 0, b_bar = 0;
  double c_bar_1 = 0, c_bar_2 = 0;  // |d phi_1|^2 + a phi_1^2 + 2 b phi_1 + c_bar_1 = 0, etc.
  double rho_bar = 0;
  double lambda_1 = 0, lambda_2 = 0;
  double c_bar_sum_unsigned = 0;    // sum with the opposite sign convention for c_bar
  double c_sum_lemma2 = 0;          // c1 + c2 from lemma2_fit
};

struct Case2Result {
  Case2Constants constants;
  std::vector<ResidualReport> checks;
  std::optional<Lemma2Fit> lemma2;
  EinsteinEstimate direct;  // einstein_check(conformal_metric(g1 + g2, phi1 + phi2))
  bool passed = false;
  bool verdicts_agree = false;
  std::vector<std::string> notes;
};

// Throws ConstantSummand when either summand is constant on its samples.
Case2Result case2_check(const MetricSpec& g1, const MetricSpec& g2, const Expr& phi1,
                        const Expr& phi2, const SamplePlan& plan, const Tolerances& tol = {});

struct Lemma3Result {
  double lambda_bar = 0.0;
  double lambda_1 = 0.0;
  std::vector<ResidualReport> checks;  // g1 Einstein, Hessian equation for phi1
  bool passed = false;
};

Lemma3Result lemma3_check(const MetricSpec& g1, const MetricSpec& g2, const Expr& phi1,
                          const Expr& phi2, const SamplePlan& plan, const Tolerances& tol = {});

// Full dichotomy for phi on a two-factor product: mixed Ricci-flatness, the
// summand split, then case I (a constant summand) or case II.
struct DichotomyResult {
  std::string route;  // "not_mixed_ricci_flat", "case_I", "case_II"
  MixedRicciResult mixed;
  std::optional<SplitResult> split;
  std::optional<Case1Result> case1;
  std::optional<Case2Result> case2;
  EinsteinEstimate direct;
  bool passed = false;
  bool verdicts_agree = false;
};

DichotomyResult dichotomy_check(const BlockMetricSpec& b, const Expr& phi, const SamplePlan& plan,
                              const Tolerances& tol = {}, std::optional<Point> anchor = {});

// Formula route versus direct curvature of phi^-2 g: Ricci, scalar and
// connection residuals (relative to 1 + |direct|).
struct OracleResult {
  ResidualReport ricci;
  ResidualReport scalar;
  ResidualReport connection;
};

OracleResult conformal_oracle_check(const ConformalSpec& c, const SamplePlan& plan,
                                    double tolerance);

// Whether a doubly twisted metric is (up to swapping the factors) a warped
// product: b constant and f independent of the fiber.
struct WarpedFormResult {
  ResidualReport base_scale_constant;  // sup |d b|
  ResidualReport warp_on_base;         // sup |d_fiber f|
  ResidualReport swapped_base_scale;   // sup |d f|
  ResidualReport swapped_warp_on_base; // sup |d_base b|
  bool passed = false;
};

WarpedFormResult warped_form_check(const DoublyTwistedSpec& d, const SamplePlan& plan,
                                   const Tolerances& tol = {});

// sup |a_ij - b_ij| over samples of two metrics on the same chart.
ResidualReport metric_identity_check(std::string name, const MetricSpec& a, const MetricSpec& b,
                                     const SamplePlan& plan, double tolerance);

}  // namespace confein
