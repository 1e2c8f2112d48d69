#pragma once

// Coordinate charts, metric fields and their curvature.
//
// Index conventions used throughout:
//   christoffel(k, i, j) = Gamma^k_{ij}
//   riemann(l, i, j, k)  = R^l_{ijk}, the l-component of R(d_i, d_j) d_k with
//                          R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]
//   ricci(j, k)          = R^i_{ijk}
// The Laplacian is the geometer's one, Delta = -trace_g(nabla d).

#include "confein/expr.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace confein {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

class Chart {
 public:
  static constexpr double kDefaultMargin = 0.1;

  Chart(std::vector<std::string> names, std::vector<Interval> domain,
        double singular_margin = kDefaultMargin);

  std::size_t dim() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Interval>& domain() const { return domain_; }
  double singular_margin() const { return margin_; }

  // Strictly inside the open coordinate box (margin not applied).
  bool contains(std::span<const double> point) const;

  Expr coordinate(std::size_t i) const;
  Expr parse(std::string_view text) const;

  Chart with_interval(std::size_t i, Interval interval) const;
  Chart with_margin(double margin) const;

 private:
  std::vector<std::string> names_;
  std::vector<Interval> domain_;
  double margin_;
};

// Symmetric matrix of expressions on a chart. Stored in full; entry(i, j) and
// entry(j, i) are always the same node.
class MetricSpec {
 public:
  // entries is row-major dim x dim and must be structurally symmetric.
  MetricSpec(Chart chart, std::vector<Expr> entries);

  static MetricSpec diagonal(Chart chart, std::vector<Expr> diag);

  const Chart& chart() const { return chart_; }
  std::size_t dim() const { return chart_.dim(); }
  const Expr& entry(std::size_t i, std::size_t j) const {
    return entries_[i * dim() + j];
  }

  Eigen::MatrixXd evaluate(std::span<const double> point) const;

  // Multiplies every entry by a constant factor.
  MetricSpec scaled(double factor) const;

 private:
  Chart chart_;
  std::vector<Expr> entries_;
};

class Christoffel {
 public:
  explicit Christoffel(std::size_t dim = 0) : n_(dim), v_(dim * dim * dim, 0.0) {}
  std::size_t dim() const { return n_; }
  double& operator()(std::size_t k, std::size_t i, std::size_t j) {
    return v_[(k * n_ + i) * n_ + j];
  }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return v_[(k * n_ + i) * n_ + j];
  }

 private:
  std::size_t n_;
  std::vector<double> v_;
};

class Riemann {
 public:
  explicit Riemann(std::size_t dim = 0) : n_(dim), v_(dim * dim * dim * dim, 0.0) {}
  std::size_t dim() const { return n_; }
  double& operator()(std::size_t l, std::size_t i, std::size_t j, std::size_t k) {
    return v_[((l * n_ + i) * n_ + j) * n_ + k];
  }
  double operator()(std::size_t l, std::size_t i, std::size_t j, std::size_t k) const {
    return v_[((l * n_ + i) * n_ + j) * n_ + k];
  }

 private:
  std::size_t n_;
  std::vector<double> v_;
};

struct CurvatureData {
  Point point;
  Eigen::MatrixXd metric;
  Eigen::MatrixXd inverse_metric;
  Christoffel christoffel;
  Riemann riemann;
  Eigen::MatrixXd ricci;
  double scalar = 0.0;
  // s / (n (n - 1)); NaN for n = 1.
  double normalized_scalar = 0.0;
};

// Metric value with exact first and second coordinate derivatives.
struct MetricJet {
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_inv;
  std::vector<Eigen::MatrixXd> dg;                // dg[m](i,j) = d_m g_ij
  std::vector<std::vector<Eigen::MatrixXd>> ddg;  // ddg[m][l](i,j)
};

// Holds the symbolic derivatives of a metric so that repeated pointwise
// evaluation does not re-differentiate. Immutable after construction.
class CurvatureEngine {
 public:
  explicit CurvatureEngine(MetricSpec metric);

  const MetricSpec& metric() const { return metric_; }
  std::size_t dim() const { return metric_.dim(); }

  // Throws Error(Precondition) outside the chart, SingularMetric when g is
  // not positive definite at the point.
  MetricJet jet(std::span<const double> point, bool with_second = true) const;

  Christoffel christoffel(std::span<const double> point) const;
  CurvatureData curvature(std::span<const double> point) const;

  static Christoffel christoffel_from(const MetricJet& jet);

 private:
  MetricSpec metric_;
  std::vector<std::shared_ptr<const ExprJet>> entry_jets_;  // row-major, shared i<->j
};

Christoffel christoffel(const MetricSpec& g, std::span<const double> point);
CurvatureData curvature(const MetricSpec& g, std::span<const double> point);

// First- and second-order data of a scalar function against a metric.
struct FieldData {
  Jet2 phi;
  Eigen::VectorXd gradient;  // g^{ij} d_j phi
  Eigen::MatrixXd hessian;   // (nabla d phi)_ij
  double laplacian = 0.0;    // -trace_g(nabla d phi)
  double grad_norm_sq = 0.0; // g^{ij} d_i phi d_j phi
};

class FieldEngine {
 public:
  FieldEngine(std::shared_ptr<const CurvatureEngine> metric, Expr phi);

  const CurvatureEngine& metric() const { return *metric_; }
  const Expr& phi() const { return phi_.expr(); }

  FieldData at(std::span<const double> point) const;
  FieldData at(const MetricJet& jet, const Christoffel& gamma,
               std::span<const double> point) const;

 private:
  std::shared_ptr<const CurvatureEngine> metric_;
  ExprJet phi_;
};

Eigen::MatrixXd hessian_lc(const Expr& phi, const MetricSpec& g,
                           std::span<const double> point);
double laplacian(const Expr& phi, const MetricSpec& g, std::span<const double> point);
double grad_norm_sq(const Expr& phi, const MetricSpec& g,
                    std::span<const double> point);
Eigen::VectorXd gradient(const Expr& phi, const MetricSpec& g,
                         std::span<const double> point);

}  // namespace confein
