#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixmode/rng.hpp"

namespace mixmode {

inline constexpr double kSigmaFloor = 1e-7;
inline constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

/// One diagonal Gaussian of a mixture: per-dimension mean and standard
/// deviation. Standard deviations are floored at kSigmaFloor on construction.
struct GaussianComponent {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  GaussianComponent(Eigen::VectorXd mean_in, Eigen::VectorXd std_in)
      : mean(std::move(mean_in)), std(std::move(std_in)) {
    if (mean.size() < 1 || mean.size() != std.size())
      throw std::invalid_argument("GaussianComponent: mean/std dimension mismatch");
    if (!mean.allFinite() || !std.allFinite())
      throw std::invalid_argument("GaussianComponent: non-finite parameter");
    for (Eigen::Index j = 0; j < std.size(); ++j) {
      if (std[j] < 0.0)
        throw std::invalid_argument("GaussianComponent: negative standard deviation");
      std[j] = std::max(std[j], kSigmaFloor);
    }
  }

  Eigen::Index dim() const { return mean.size(); }
};

/// Mixing weights plus components of equal dimension. Immutable after
/// construction; weights must sum to 1 within 1e-9.
class Mixture {
 public:
  Mixture(Eigen::VectorXd weights, std::vector<GaussianComponent> components)
      : weights_(std::move(weights)), components_(std::move(components)) {
    if (components_.empty() || weights_.size() != static_cast<Eigen::Index>(components_.size()))
      throw std::invalid_argument("Mixture: weight/component count mismatch");
    const Eigen::Index d = components_.front().dim();
    for (const auto& c : components_) {
      if (c.dim() != d) throw std::invalid_argument("Mixture: component dimension mismatch");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      const double w = weights_[i];
      if (!(w >= 0.0 && w <= 1.0))
        throw std::invalid_argument("Mixture: weight outside [0,1]");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("Mixture: weights do not sum to 1");
  }

  Eigen::Index k() const { return static_cast<Eigen::Index>(components_.size()); }
  Eigen::Index dim() const { return components_.front().dim(); }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(Eigen::Index i) const { return weights_[i]; }
  const GaussianComponent& component(Eigen::Index i) const {
    return components_[static_cast<std::size_t>(i)];
  }
  const std::vector<GaussianComponent>& components() const { return components_; }

 private:
  Eigen::VectorXd weights_;
  std::vector<GaussianComponent> components_;
};

/// log N(y | mean, diag(std^2)) for one diagonal Gaussian.
inline double log_pdf_gaussian(const GaussianComponent& c,
                               const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != c.dim())
    throw std::invalid_argument("log_pdf_gaussian: dimension mismatch");
  const Eigen::ArrayXd z = (y - c.mean).array() / c.std.array();
  return -0.5 * z.square().sum() - c.std.array().log().sum() -
         0.5 * static_cast<double>(c.dim()) * kLogTwoPi;
}

namespace detail {

// Per-row [log w_i + log N(row | comp_i)] for a batch of points, then the
// row-wise log-sum-exp. Zero-weight components enter as -inf and drop out.
inline Eigen::VectorXd log_pdf_batch(const Mixture& m,
                                     const Eigen::Ref<const Eigen::MatrixXd>& ys) {
  const Eigen::Index n = ys.rows();
  const Eigen::Index k = m.k();
  Eigen::MatrixXd terms(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& c = m.component(i);
    const double logw = m.weight(i) > 0.0
                            ? std::log(m.weight(i))
                            : -std::numeric_limits<double>::infinity();
    const double norm = -c.std.array().log().sum() -
                        0.5 * static_cast<double>(c.dim()) * kLogTwoPi;
    Eigen::ArrayXXd z = ys.array().rowwise() - c.mean.transpose().array();
    z.rowwise() /= c.std.transpose().array();
    terms.col(i) = (logw + norm) - 0.5 * z.square().rowwise().sum();
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mx = terms.row(r).maxCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) s += std::exp(terms(r, i) - mx);
    out[r] = mx + std::log(s);
  }
  return out;
}

}  // namespace detail

/// Mixture log density log sum_i w_i N(y | mu_i, diag(sigma_i^2)), computed
/// via log-sum-exp; finite for all finite y.
inline double log_pdf(const Mixture& m, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != m.dim()) throw std::invalid_argument("log_pdf: dimension mismatch");
  return detail::log_pdf_batch(m, y.transpose())[0];
}

/// Batched log_pdf over the rows of `ys` (n x d).
inline Eigen::VectorXd log_pdf_rows(const Mixture& m,
                                    const Eigen::Ref<const Eigen::MatrixXd>& ys) {
  if (ys.cols() != m.dim()) throw std::invalid_argument("log_pdf_rows: dimension mismatch");
  return detail::log_pdf_batch(m, ys);
}

/// Draws n samples (rows) by categorical choice over the weights followed by
/// per-dimension Gaussian draws. Deterministic given the RandomSource state.
inline Eigen::MatrixXd sample(const Mixture& m, RandomSource& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const Eigen::Index d = m.dim();
  Eigen::MatrixXd out(n, d);
  std::span<const double> w(m.weights().data(), static_cast<std::size_t>(m.k()));
  for (int s = 0; s < n; ++s) {
    const auto& c = m.component(static_cast<Eigen::Index>(rng.categorical(w)));
    for (Eigen::Index j = 0; j < d; ++j) out(s, j) = c.mean[j] + c.std[j] * rng.normal();
  }
  return out;
}

/// Closed-form KL(a || b) between diagonal Gaussians (nats).
inline double kl_gaussian(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("kl_gaussian: dimension mismatch");
  double total = 0.0;
  for (Eigen::Index j = 0; j < a.dim(); ++j) {
    const double sa = a.std[j];
    const double sb = b.std[j];
    const double dm = a.mean[j] - b.mean[j];
    total += std::log(sb / sa) + (sa * sa + dm * dm) / (2.0 * sb * sb) - 0.5;
  }
  return total;
}

/// Closed-form 2-Wasserstein distance between diagonal Gaussians:
/// sqrt(|mu_a - mu_b|^2 + |sigma_a - sigma_b|^2).
inline double w2_gaussian(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("w2_gaussian: dimension mismatch");
  return std::sqrt((a.mean - b.mean).squaredNorm() + (a.std - b.std).squaredNorm());
}

/// Differential entropy of one diagonal Gaussian, sum_j 0.5*log(2*pi*e*sigma_j^2).
inline double entropy_gaussian(const GaussianComponent& c) {
  return 0.5 * static_cast<double>(c.dim()) * (kLogTwoPi + 1.0) + c.std.array().log().sum();
}

struct Interval {
  double lo;
  double hi;
};

/// Quadrature support envelope [min mu - 10*max sigma, max mu + 10*max sigma].
/// Only meaningful for 1-D mixtures.
inline Interval support_envelope(const Mixture& m) {
  if (m.dim() != 1) throw std::invalid_argument("support_envelope: requires d = 1");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double smax = 0.0;
  for (const auto& c : m.components()) {
    lo = std::min(lo, c.mean[0]);
    hi = std::max(hi, c.mean[0]);
    smax = std::max(smax, c.std[0]);
  }
  return {lo - 10.0 * smax, hi + 10.0 * smax};
}

/// Estimator selection for mixture_entropy / jsd. The Monte Carlo path is
/// seeded; the quadrature path is exact to grid resolution but 1-D only.
struct EntropyEstimatorConfig {
  enum class Method { kMonteCarlo, kQuadrature };

  Method method = Method::kQuadrature;
  int n_samples = 65536;
  std::uint64_t seed = 0;
  int points = 20001;

  static EntropyEstimatorConfig monte_carlo(int n, std::uint64_t seed) {
    EntropyEstimatorConfig cfg;
    cfg.method = Method::kMonteCarlo;
    cfg.n_samples = n;
    cfg.seed = seed;
    return cfg;
  }
  static EntropyEstimatorConfig quadrature(int points = 20001) {
    EntropyEstimatorConfig cfg;
    cfg.method = Method::kQuadrature;
    cfg.points = points;
    return cfg;
  }
};

namespace detail {

// Trapezoid rule over the support envelope with `points` uniform nodes.
inline double entropy_quadrature(const Mixture& m, int points) {
  const Interval iv = support_envelope(m);
  const double h = (iv.hi - iv.lo) / static_cast<double>(points - 1);
  double acc = 0.0;
  Eigen::VectorXd y(1);
  for (int i = 0; i < points; ++i) {
    y[0] = iv.lo + h * static_cast<double>(i);
    const double lp = log_pdf(m, y);
    const double f = -std::exp(lp) * lp;  // -p log p; underflows cleanly to 0
    acc += (i == 0 || i == points - 1) ? 0.5 * f : f;
  }
  return acc * h;
}

// Monte Carlo entropy with proportional stratification over components:
// n_i ~ w_i * N samples drawn from component i, estimate
// -sum_i w_i * mean_s log_pdf(m, y_{i,s}). Unbiased, and the categorical
// selection variance of plain mixture sampling drops out entirely.
inline double entropy_monte_carlo(const Mixture& m, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("mixture_entropy: n_samples must be >= 1");
  const Eigen::Index k = m.k();
  std::vector<int> alloc(static_cast<std::size_t>(k), 0);
  std::vector<std::pair<double, Eigen::Index>> remainders;
  int assigned = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double target = m.weight(i) * static_cast<double>(n_samples);
    const int base = static_cast<int>(std::floor(target));
    alloc[static_cast<std::size_t>(i)] = base;
    assigned += base;
    if (m.weight(i) > 0.0) remainders.emplace_back(target - base, i);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = n_samples - assigned, idx = 0; r > 0; --r, ++idx) {
    alloc[static_cast<std::size_t>(remainders[static_cast<std::size_t>(idx % remainders.size())].second)]++;
  }
  // Every positive-weight stratum needs at least one draw to stay unbiased.
  for (Eigen::Index i = 0; i < k; ++i) {
    if (m.weight(i) > 0.0 && alloc[static_cast<std::size_t>(i)] == 0) {
      auto donor = std::max_element(alloc.begin(), alloc.end());
      if (*donor > 1) {
        (*donor)--;
        alloc[static_cast<std::size_t>(i)] = 1;
      }
    }
  }

  RandomSource rng(seed);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const int ni = alloc[static_cast<std::size_t>(i)];
    if (m.weight(i) <= 0.0 || ni == 0) continue;
    const auto& c = m.component(i);
    Eigen::MatrixXd z(ni, m.dim());
    fill_normal(rng, z);
    Eigen::MatrixXd ys = (z.array().rowwise() * c.std.transpose().array()).matrix();
    ys.rowwise() += c.mean.transpose();
    acc += m.weight(i) * log_pdf_rows(m, ys).mean();
  }
  return -acc;
}

}  // namespace detail

/// Estimate of the mixture differential entropy -E[log p(Y)].
inline double mixture_entropy(const Mixture& m, const EntropyEstimatorConfig& cfg) {
  if (cfg.method == EntropyEstimatorConfig::Method::kQuadrature) {
    if (m.dim() != 1)
      throw std::invalid_argument("mixture_entropy: quadrature estimator requires d = 1");
    if (cfg.points < 3) throw std::invalid_argument("mixture_entropy: points must be >= 3");
    return detail::entropy_quadrature(m, cfg.points);
  }
  return detail::entropy_monte_carlo(m, cfg.n_samples, cfg.seed);
}

}  // namespace mixmode
