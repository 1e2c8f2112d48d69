#include "confein/geometry.hpp"

#include "confein/errors.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace confein {
namespace {

constexpr double kPositiveDefiniteTol = 1e-12;

std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << ')';
  return os.str();
}

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

// ---------------------------------------------------------------------------
// Chart

Chart::Chart(std::vector<std::string> names, std::vector<Interval> domain,
             double singular_margin)
    : names_(std::move(names)), domain_(std::move(domain)), margin_(singular_margin) {
  if (names_.empty()) throw Error(ErrorCode::UnsupportedDim, "chart needs at least one coordinate");
  if (names_.size() != domain_.size()) {
    throw Error(ErrorCode::Precondition, "chart has " + std::to_string(names_.size()) +
                                             " names but " + std::to_string(domain_.size()) +
                                             " intervals");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) {
      throw Error(ErrorCode::Precondition, "duplicate coordinate name '" + n + "'");
    }
  }
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    if (!(domain_[i].lo < domain_[i].hi)) {
      throw Error(ErrorCode::EmptyDomain, "empty interval for coordinate '" + names_[i] + "'");
    }
  }
  if (!(margin_ >= 0.0)) throw Error(ErrorCode::Precondition, "singular margin must be >= 0");
}

bool Chart::contains(std::span<const double> point) const {
  if (point.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(point[i] > domain_[i].lo && point[i] < domain_[i].hi)) return false;
  }
  return true;
}

Expr Chart::coordinate(std::size_t i) const { return Expr::coordinate(i, names_.at(i)); }

Expr Chart::parse(std::string_view text) const { return confein::parse(text, names_); }

Chart Chart::with_interval(std::size_t i, Interval interval) const {
  auto domain = domain_;
  domain.at(i) = interval;
  return Chart(names_, std::move(domain), margin_);
}

Chart Chart::with_margin(double margin) const { return Chart(names_, domain_, margin); }

// ---------------------------------------------------------------------------
// MetricSpec

MetricSpec::MetricSpec(Chart chart, std::vector<Expr> entries)
    : chart_(std::move(chart)), entries_(std::move(entries)) {
  const std::size_t n = chart_.dim();
  if (entries_.size() != n * n) {
    throw Error(ErrorCode::Precondition, "metric needs " + std::to_string(n * n) +
                                             " entries, got " + std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Expr& e = entries_[i * n + j];
      if (e.arity() > n) {
        throw Error(ErrorCode::Precondition, "metric entry (" + std::to_string(i) + "," +
                                                 std::to_string(j) +
                                                 ") references a coordinate outside the chart");
      }
      if (j > i) {
        if (!structurally_equal(e, entries_[j * n + i])) {
          throw Error(ErrorCode::Precondition, "metric entries (" + std::to_string(i) + "," +
                                                   std::to_string(j) + ") and (" +
                                                   std::to_string(j) + "," + std::to_string(i) +
                                                   ") differ");
        }
        entries_[j * n + i] = e;
      }
    }
  }
}

MetricSpec MetricSpec::diagonal(Chart chart, std::vector<Expr> diag) {
  const std::size_t n = chart.dim();
  if (diag.size() != n) throw Error(ErrorCode::Precondition, "diagonal length does not match chart");
  std::vector<Expr> entries(n * n, Expr::constant(0.0));
  for (std::size_t i = 0; i < n; ++i) entries[i * n + i] = std::move(diag[i]);
  return MetricSpec(std::move(chart), std::move(entries));
}

Eigen::MatrixXd MetricSpec::evaluate(std::span<const double> point) const {
  const std::size_t n = dim();
  Eigen::MatrixXd g(ix(n), ix(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = confein::evaluate(entry(i, j), point);
      g(ix(i), ix(j)) = v;
      g(ix(j), ix(i)) = v;
    }
  }
  return g;
}

MetricSpec MetricSpec::scaled(double factor) const {
  std::vector<Expr> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(factor * e);
  return MetricSpec(chart_, std::move(out));
}

// ---------------------------------------------------------------------------
// CurvatureEngine

CurvatureEngine::CurvatureEngine(MetricSpec metric) : metric_(std::move(metric)) {
  const std::size_t n = dim();
  entry_jets_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      auto jet = std::make_shared<const ExprJet>(metric_.entry(i, j), n);
      entry_jets_[i * n + j] = jet;
      entry_jets_[j * n + i] = jet;
    }
  }
}

MetricJet CurvatureEngine::jet(std::span<const double> point, bool with_second) const {
  const std::size_t n = dim();
  if (!metric_.chart().contains(point)) {
    throw Error(ErrorCode::Precondition, "point " + format_point(point) + " is outside the chart");
  }
  MetricJet out;
  out.g = Eigen::MatrixXd::Zero(ix(n), ix(n));
  out.dg.assign(n, Eigen::MatrixXd::Zero(ix(n), ix(n)));
  if (with_second) {
    out.ddg.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(ix(n), ix(n))));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const ExprJet& e = *entry_jets_[i * n + j];
      if (e.expr().is_constant()) {
        out.g(ix(i), ix(j)) = out.g(ix(j), ix(i)) = e.expr().value();
        continue;
      }
      const double v = confein::evaluate(e.expr(), point);
      out.g(ix(i), ix(j)) = out.g(ix(j), ix(i)) = v;
      for (std::size_t m = 0; m < n; ++m) {
        const double d = confein::evaluate(e.first(m), point);
        out.dg[m](ix(i), ix(j)) = out.dg[m](ix(j), ix(i)) = d;
      }
      if (!with_second) continue;
      for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t l = m; l < n; ++l) {
          const double dd = confein::evaluate(e.second(m, l), point);
          out.ddg[m][l](ix(i), ix(j)) = out.ddg[m][l](ix(j), ix(i)) = dd;
          out.ddg[l][m](ix(i), ix(j)) = out.ddg[l][m](ix(j), ix(i)) = dd;
        }
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.g, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > kPositiveDefiniteTol)) {
    throw Error(ErrorCode::SingularMetric, "metric is not positive definite at " +
                                               format_point(point));
  }
  out.g_inv = out.g.inverse();
  return out;
}

Christoffel CurvatureEngine::christoffel_from(const MetricJet& jet) {
  const std::size_t n = static_cast<std::size_t>(jet.g.rows());
  Christoffel gamma(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          const double first_kind = jet.dg[i](ix(j), ix(l)) + jet.dg[j](ix(i), ix(l)) -
                                    jet.dg[l](ix(i), ix(j));
          sum += jet.g_inv(ix(k), ix(l)) * first_kind;
        }
        gamma(k, i, j) = gamma(k, j, i) = 0.5 * sum;
      }
    }
  }
  return gamma;
}

Christoffel CurvatureEngine::christoffel(std::span<const double> point) const {
  return christoffel_from(jet(point, false));
}

CurvatureData CurvatureEngine::curvature(std::span<const double> point) const {
  const std::size_t n = dim();
  const MetricJet mj = jet(point, true);
  Christoffel gamma = christoffel_from(mj);

  // d_m Gamma^k_{ij} = d_m g^{kl} Gamma_{lij} + g^{kl} d_m Gamma_{lij}
  //   with d_m g^{kl} = -g^{ka} d_m g_{ab} g^{bl}.
  std::vector<double> dgamma(n * n * n * n, 0.0);
  auto dG = [&](std::size_t m, std::size_t k, std::size_t i, std::size_t j) -> double& {
    return dgamma[((m * n + k) * n + i) * n + j];
  };
  for (std::size_t m = 0; m < n; ++m) {
    const Eigen::MatrixXd dginv = -mj.g_inv * mj.dg[m] * mj.g_inv;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          double sum = 0.0;
          for (std::size_t l = 0; l < n; ++l) {
            const double first_kind = 0.5 * (mj.dg[i](ix(j), ix(l)) + mj.dg[j](ix(i), ix(l)) -
                                             mj.dg[l](ix(i), ix(j)));
            const double d_first_kind =
                0.5 * (mj.ddg[m][i](ix(j), ix(l)) + mj.ddg[m][j](ix(i), ix(l)) -
                       mj.ddg[m][l](ix(i), ix(j)));
            sum += dginv(ix(k), ix(l)) * first_kind + mj.g_inv(ix(k), ix(l)) * d_first_kind;
          }
          dG(m, k, i, j) = dG(m, k, j, i) = sum;
        }
      }
    }
  }

  CurvatureData out;
  out.point.assign(point.begin(), point.end());
  out.metric = mj.g;
  out.inverse_metric = mj.g_inv;
  out.riemann = Riemann(n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        for (std::size_t k = 0; k < n; ++k) {
          double v = dG(i, l, j, k) - dG(j, l, i, k);
          for (std::size_t m = 0; m < n; ++m) {
            v += gamma(l, i, m) * gamma(m, j, k) - gamma(l, j, m) * gamma(m, i, k);
          }
          out.riemann(l, i, j, k) = v;
        }
      }
    }
  }
  out.ricci = Eigen::MatrixXd::Zero(ix(n), ix(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += out.riemann(i, i, j, k);
      out.ricci(ix(j), ix(k)) = v;
    }
  }
  out.ricci = 0.5 * (out.ricci + out.ricci.transpose()).eval();
  out.scalar = (mj.g_inv.cwiseProduct(out.ricci)).sum();
  out.normalized_scalar = n > 1 ? out.scalar / static_cast<double>(n * (n - 1))
                                : std::numeric_limits<double>::quiet_NaN();
  out.christoffel = std::move(gamma);
  return out;
}

Christoffel christoffel(const MetricSpec& g, std::span<const double> point) {
  return CurvatureEngine(g).christoffel(point);
}

CurvatureData curvature(const MetricSpec& g, std::span<const double> point) {
  return CurvatureEngine(g).curvature(point);
}

// ---------------------------------------------------------------------------
// Scalar fields

FieldEngine::FieldEngine(std::shared_ptr<const CurvatureEngine> metric, Expr phi)
    : metric_(std::move(metric)), phi_(std::move(phi), metric_->dim()) {
  if (phi_.expr().arity() > metric_->dim()) {
    throw Error(ErrorCode::Precondition, "function references a coordinate outside the chart");
  }
}

FieldData FieldEngine::at(std::span<const double> point) const {
  const MetricJet mj = metric_->jet(point, false);
  return at(mj, CurvatureEngine::christoffel_from(mj), point);
}

FieldData FieldEngine::at(const MetricJet& jet, const Christoffel& gamma,
                          std::span<const double> point) const {
  const std::size_t n = metric_->dim();
  FieldData out;
  out.phi = phi_.evaluate(point);
  out.hessian = out.phi.hessian;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double corr = 0.0;
      for (std::size_t k = 0; k < n; ++k) corr += gamma(k, i, j) * out.phi.gradient[ix(k)];
      out.hessian(ix(i), ix(j)) -= corr;
    }
  }
  out.gradient = jet.g_inv * out.phi.gradient;
  out.grad_norm_sq = out.phi.gradient.dot(out.gradient);
  out.laplacian = -(jet.g_inv.cwiseProduct(out.hessian)).sum();
  return out;
}

namespace {
FieldData field_at(const Expr& phi, const MetricSpec& g, std::span<const double> point) {
  return FieldEngine(std::make_shared<const CurvatureEngine>(g), phi).at(point);
}
}  // namespace

Eigen::MatrixXd hessian_lc(const Expr& phi, const MetricSpec& g, std::span<const double> point) {
  return field_at(phi, g, point).hessian;
}

double laplacian(const Expr& phi, const MetricSpec& g, std::span<const double> point) {
  return field_at(phi, g, point).laplacian;
}

double grad_norm_sq(const Expr& phi, const MetricSpec& g, std::span<const double> point) {
  return field_at(phi, g, point).grad_norm_sq;
}

Eigen::VectorXd gradient(const Expr& phi, const MetricSpec& g, std::span<const double> point) {
  return field_at(phi, g, point).gradient;
}

}  // namespace confein
