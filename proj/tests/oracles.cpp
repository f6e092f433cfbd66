#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>
#include <Eigen/Eigenvalues>

namespace oracles {

namespace {

// Asymptotic Kolmogorov distribution tail with the usual small-sample
// correction of the statistic.
double kolmogorov_tail(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

double ks_uniform_pvalue(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = values[i];
    d = std::max({d, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
  }
  return kolmogorov_tail(d, n);
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return kolmogorov_tail(d, na * nb / (na + nb));
}

double chi_square_homogeneity_pvalue(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<double> ma, mb;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const double x = i < a.size() ? static_cast<double>(a[i]) : 0.0;
    const double y = i < b.size() ? static_cast<double>(b[i]) : 0.0;
    if (!ma.empty() && ma.back() + mb.back() < 10.0) {
      ma.back() += x;
      mb.back() += y;
    } else {
      ma.push_back(x);
      mb.push_back(y);
    }
  }
  while (ma.size() > 1 && ma.back() + mb.back() < 10.0) {
    ma[ma.size() - 2] += ma.back();
    mb[mb.size() - 2] += mb.back();
    ma.pop_back();
    mb.pop_back();
  }
  if (ma.size() < 2) return 1.0;
  double ta = 0.0, tb = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    ta += ma[i];
    tb += mb[i];
  }
  const double total = ta + tb;
  double stat = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const double pooled = ma[i] + mb[i];
    const double ea = pooled * ta / total, eb = pooled * tb / total;
    stat += (ma[i] - ea) * (ma[i] - ea) / ea + (mb[i] - eb) * (mb[i] - eb) / eb;
  }
  const boost::math::chi_squared dist(static_cast<double>(ma.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double alpha_monte_carlo(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& x, std::size_t draws,
                         std::mt19937_64& rng) {
  const Eigen::Index N = x.size();
  const Eigen::Index r = jacobian.rows();
  const Eigen::Index n = N - r;
  const Eigen::MatrixXd jt = jacobian.transpose();
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(jt).householderQ();
  const Eigen::MatrixXd V = Q.rightCols(n);
  std::normal_distribution<double> normal;
  const double norm_const = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(n));
  double sum = 0.0;
  Eigen::MatrixXd A(n, N);
  for (std::size_t s = 0; s < draws; ++s) {
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = normal(rng);
    const double b2 = (A * x).squaredNorm();
    sum += norm_const * std::exp(-0.5 * b2) * std::fabs((A * V).determinant());
  }
  return sum / static_cast<double>(draws);
}

double Polyline::length() const {
  return integrate([](const Eigen::Vector2d&) { return 1.0; });
}

double Polyline::integrate(const std::function<double(const Eigen::Vector2d&)>& g) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector2d& p = points[i];
    const Eigen::Vector2d& q = points[(i + 1) % points.size()];
    sum += 0.5 * (g(p) + g(q)) * (q - p).norm();
  }
  return sum;
}

std::vector<double> real_polynomial_roots(const std::vector<double>& c) {
  std::size_t deg = c.size() - 1;
  while (deg > 0 && c[deg] == 0.0) --deg;
  if (deg == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
  for (std::size_t i = 1; i < deg; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < deg; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -c[i] / c[deg];
  const Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  auto eval = [&](double x) {
    double v = 0.0, dv = 0.0;
    for (std::size_t i = deg + 1; i-- > 0;) {
      dv = dv * x + v;
      v = v * x + c[i];
    }
    return std::pair{v, dv};
  };
  std::vector<double> out;
  for (const auto& z : es.eigenvalues()) {
    if (std::fabs(z.imag()) > 1e-7 * (1.0 + std::abs(z))) continue;
    double x = z.real();
    for (int it = 0; it < 3; ++it) {
      const auto [v, dv] = eval(x);
      if (dv == 0.0) break;
      x -= v / dv;
    }
    out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Polyline> trace_plane_curve(const std::function<double(const Eigen::Vector2d&)>& F,
                                        const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& grad,
                                        const std::function<std::vector<double>(double)>& roots_at_height,
                                        double y_min, double y_max, double step) {
  auto project = [&](Eigen::Vector2d p) -> Eigen::Vector2d {
    for (int it = 0; it < 4; ++it) {
      const Eigen::Vector2d g = grad(p);
      p -= F(p) * g / g.squaredNorm();
    }
    return p;
  };
  auto tangent = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
    const Eigen::Vector2d g = grad(p);
    return Eigen::Vector2d(-g.y(), g.x()) / g.norm();
  };
  std::vector<Polyline> curves;
  const int heights = 400;
  for (int h = 0; h <= heights; ++h) {
    const double y = y_min + (y_max - y_min) * h / heights;
    for (const double x : roots_at_height(y)) {
      const Eigen::Vector2d seed = project({x, y});
      bool known = false;
      for (const auto& c : curves)
        for (const auto& q : c.points)
          if ((q - seed).norm() < 2.0 * step) {
            known = true;
            break;
          }
      if (known) continue;
      Polyline line;
      Eigen::Vector2d p = seed;
      double travelled = 0.0;
      for (;;) {
        line.points.push_back(p);
        const Eigen::Vector2d k1 = tangent(p);
        const Eigen::Vector2d k2 = tangent(p + 0.5 * step * k1);
        const Eigen::Vector2d k3 = tangent(p + 0.5 * step * k2);
        const Eigen::Vector2d k4 = tangent(p + step * k3);
        p = project(p + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        travelled += step;
        if (travelled > 10.0 * step && (p - seed).norm() < step) break;
        if (travelled > 1e3) break;
      }
      curves.push_back(std::move(line));
    }
  }
  return curves;
}

const std::vector<Polyline>& quartic_curve() {
  static const std::vector<Polyline> curves = trace_plane_curve(
      [](const Eigen::Vector2d& p) {
        const double x = p.x(), y = p.y();
        return x * x * x * x + y * y * y * y - 3 * x * x - x * y * y - y + 1;
      },
      [](const Eigen::Vector2d& p) {
        const double x = p.x(), y = p.y();
        return Eigen::Vector2d(4 * x * x * x - 6 * x - y * y, 4 * y * y * y - 2 * x * y - 1);
      },
      [](double y) { return real_polynomial_roots({y * y * y * y - y + 1, -y * y, -3.0, 0.0, 1.0}); }, -2.5, 2.5,
      2e-4);
  return curves;
}

double ellipse_perimeter(double a, double b) {
  auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  return boost::math::quadrature::trapezoidal(speed, 0.0, 2.0 * std::numbers::pi, 1e-14);
}

}  // namespace oracles
