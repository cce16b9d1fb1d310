#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mixmode/gmm.hpp"

namespace mixmode::oracle {

// Slow numerical ground truth used to validate the closed forms and
// estimators in gmm.hpp. Test-side code; nothing here is on a hot path.

/// Uniform 1-D quadrature grid. `points` must be odd so that refinements by
/// doubling the interval count stay on the same family of grids.
struct GridSpec {
  double lower;
  double upper;
  int points;

  GridSpec(double lower_in, double upper_in, int points_in)
      : lower(lower_in), upper(upper_in), points(points_in) {
    if (!(upper > lower)) throw std::invalid_argument("GridSpec: upper must exceed lower");
    if (points < 3 || points % 2 == 0)
      throw std::invalid_argument("GridSpec: points must be odd and >= 3");
  }

  double step() const { return (upper - lower) / static_cast<double>(points - 1); }
};

/// Envelope grid covering both Gaussians out to 10 standard deviations.
inline GridSpec default_grid(const GaussianComponent& a, const GaussianComponent& b,
                             int points = 20001) {
  const double lo = std::min(a.mean[0], b.mean[0]) - 10.0 * std::max(a.std[0], b.std[0]);
  const double hi = std::max(a.mean[0], b.mean[0]) + 10.0 * std::max(a.std[0], b.std[0]);
  return GridSpec(lo, hi, points);
}

inline GridSpec default_grid(const Mixture& m, int points = 20001) {
  const Interval iv = support_envelope(m);
  return GridSpec(iv.lo, iv.hi, points);
}

namespace detail {

inline double log_pdf_1d(const GaussianComponent& c, double y) {
  const double z = (y - c.mean[0]) / c.std[0];
  return -0.5 * z * z - std::log(c.std[0]) - 0.5 * kLogTwoPi;
}

/// Standard normal quantile. Acklam's rational approximation polished with
/// one Halley step against erfc, accurate to ~1e-15 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace detail

/// Trapezoid of p_a(y) * (log p_a(y) - log p_b(y)) over the grid.
inline double kl_quadrature_1d(const GaussianComponent& a, const GaussianComponent& b,
                               const GridSpec& grid) {
  if (a.dim() != 1 || b.dim() != 1)
    throw std::invalid_argument("kl_quadrature_1d: requires d = 1");
  const double h = grid.step();
  double acc = 0.0;
  for (int i = 0; i < grid.points; ++i) {
    const double y = grid.lower + h * static_cast<double>(i);
    const double la = detail::log_pdf_1d(a, y);
    const double lb = detail::log_pdf_1d(b, y);
    const double f = std::exp(la) * (la - lb);
    acc += (i == 0 || i == grid.points - 1) ? 0.5 * f : f;
  }
  return acc * h;
}

inline double kl_quadrature_1d(const GaussianComponent& a, const GaussianComponent& b) {
  return kl_quadrature_1d(a, b, default_grid(a, b));
}

/// W1 and W2 via the quantile coupling on midpoint quantiles
/// u_i = (i + 0.5) / Q:  W_p = (mean_i |F_a^-1(u_i) - F_b^-1(u_i)|^p)^(1/p).
inline std::pair<double, double> wasserstein_1d(const GaussianComponent& a,
                                                const GaussianComponent& b,
                                                int quantile_points = 200001) {
  if (a.dim() != 1 || b.dim() != 1)
    throw std::invalid_argument("wasserstein_1d: requires d = 1");
  if (quantile_points < 1) throw std::invalid_argument("wasserstein_1d: need >= 1 quantiles");
  double acc1 = 0.0;
  double acc2 = 0.0;
  for (int i = 0; i < quantile_points; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(quantile_points);
    const double z = detail::normal_quantile(u);
    const double diff = (a.mean[0] + a.std[0] * z) - (b.mean[0] + b.std[0] * z);
    acc1 += std::abs(diff);
    acc2 += diff * diff;
  }
  const double q = static_cast<double>(quantile_points);
  return {acc1 / q, std::sqrt(acc2 / q)};
}

/// Trapezoid of -p(y) log p(y) for a 1-D mixture over the grid.
inline double entropy_quadrature_1d(const Mixture& m, const GridSpec& grid) {
  if (m.dim() != 1) throw std::invalid_argument("entropy_quadrature_1d: requires d = 1");
  const double h = grid.step();
  double acc = 0.0;
  Eigen::VectorXd y(1);
  for (int i = 0; i < grid.points; ++i) {
    y[0] = grid.lower + h * static_cast<double>(i);
    const double lp = log_pdf(m, y);
    const double f = -std::exp(lp) * lp;
    acc += (i == 0 || i == grid.points - 1) ? 0.5 * f : f;
  }
  return acc * h;
}

inline double entropy_quadrature_1d(const Mixture& m) {
  return entropy_quadrature_1d(m, default_grid(m));
}

}  // namespace mixmode::oracle
