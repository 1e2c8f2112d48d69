#include "fd_oracle.hpp"

#include <type_traits>

namespace fd {

double derivative(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

namespace {

Point shifted(Point p, std::size_t i, double t) {
  p[i] += t;
  return p;
}

// Concrete return type: an Eigen expression here would outlive its operands.
template <class F, class T = std::decay_t<std::invoke_result_t<const F&, const Point&>>>
T partial(const F& f, const Point& p, std::size_t i, double h) {
  return (-f(shifted(p, i, 2 * h)) + 8 * f(shifted(p, i, h)) - 8 * f(shifted(p, i, -h)) +
          f(shifted(p, i, -2 * h))) /
         (12 * h);
}

}  // namespace

Eigen::VectorXd gradient(const ScalarFn& f, const Point& p, double h) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) out[static_cast<Eigen::Index>(i)] = partial(f, p, i, h);
  return out;
}

Eigen::MatrixXd hessian(const ScalarFn& f, const Point& p, double h) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd out(n, n);
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto di = [&](const Point& q) { return partial(f, q, i, h); };
    for (std::size_t j = 0; j < p.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = partial(di, p, j, h);
    }
  }
  return 0.5 * (out + out.transpose());
}

Christoffels christoffel(const MetricFn& g, const Point& p, double h) {
  const std::size_t n = p.size();
  std::vector<Eigen::MatrixXd> dg;
  for (std::size_t m = 0; m < n; ++m) dg.push_back(partial(g, p, m, h));
  const Eigen::MatrixXd inv = g(p).inverse();
  Christoffels c{n, std::vector<double>(n * n * n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          const auto L = static_cast<Eigen::Index>(l);
          const auto I = static_cast<Eigen::Index>(i);
          const auto J = static_cast<Eigen::Index>(j);
          s += inv(static_cast<Eigen::Index>(k), L) * (dg[i](J, L) + dg[j](I, L) - dg[l](I, J));
        }
        c.v[(k * n + i) * n + j] = 0.5 * s;
      }
    }
  }
  return c;
}

Curvature curvature(const MetricFn& g, const Point& p, double h) {
  const std::size_t n = p.size();
  Curvature out;
  out.gamma = christoffel(g, p, h);
  // dgamma[m] holds d_m Gamma.
  std::vector<std::vector<double>> dgamma(n);
  for (std::size_t m = 0; m < n; ++m) {
    auto gm = [&](const Point& q) {
      const Christoffels c = christoffel(g, q, h);
      return Eigen::Map<const Eigen::VectorXd>(c.v.data(), static_cast<Eigen::Index>(c.v.size())).eval();
    };
    const Eigen::VectorXd d = partial(gm, p, m, h);
    dgamma[m].assign(d.data(), d.data() + d.size());
  }
  auto G = [&](std::size_t k, std::size_t i, std::size_t j) { return out.gamma(k, i, j); };
  auto dG = [&](std::size_t m, std::size_t k, std::size_t i, std::size_t j) {
    return dgamma[m][(k * n + i) * n + j];
  };
  out.ricci = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += dG(i, i, j, k) - dG(j, i, i, k);
        for (std::size_t m = 0; m < n; ++m) s += G(i, i, m) * G(m, j, k) - G(i, j, m) * G(m, i, k);
      }
      out.ricci(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = s;
    }
  }
  out.ricci = 0.5 * (out.ricci + out.ricci.transpose()).eval();
  out.scalar = (g(p).inverse().cwiseProduct(out.ricci)).sum();
  return out;
}

double laplacian(const MetricFn& g, const ScalarFn& f, const Point& p, double h) {
  const std::size_t n = p.size();
  const Christoffels c = christoffel(g, p, h);
  const Eigen::VectorXd df = gradient(f, p, h);
  const Eigen::MatrixXd ddf = hessian(f, p, h);
  const Eigen::MatrixXd inv = g(p).inverse();
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double cov = ddf(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      for (std::size_t k = 0; k < n; ++k) cov -= c(k, i, j) * df[static_cast<Eigen::Index>(k)];
      tr += inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * cov;
    }
  }
  return -tr;
}

}  // namespace fd
