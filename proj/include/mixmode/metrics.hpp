#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "mixmode/gmm.hpp"

namespace mixmode {

// The four multimodality metrics, each mapping a Mixture to a scalar score.
// A single component is definitionally unimodal: every metric returns 0 for
// k = 1. All entropies and divergences are in nats.

enum class Metric { kMce, kWakld, kSemd, kJsd };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kMce: return "mce";
    case Metric::kWakld: return "wakld";
    case Metric::kSemd: return "semd";
    case Metric::kJsd: return "jsd";
  }
  return "?";
}

struct MetricValue {
  Metric name;
  double value;
  // (sample count, seed) when the value came from a Monte Carlo estimator.
  std::optional<std::pair<int, std::uint64_t>> estimator_meta;
};

/// Mixing Coefficient Entropy: H(weights) / log k, in [0, 1].
/// 1 for uniform weights, 0 for one-hot weights (and for k = 1).
inline double mce(const Mixture& m) {
  const Eigen::Index k = m.k();
  if (k < 2) return 0.0;
  double h = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double w = m.weight(i);
    if (w > 0.0) h -= w * std::log(w);  // 0 log 0 := 0
  }
  return h / std::log(static_cast<double>(k));
}

/// Doubly weight-averaged pairwise KL: sum_i w_i sum_j w_j KL(p_i || p_j).
inline double wakld(const Mixture& m) {
  const Eigen::Index k = m.k();
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (m.weight(i) <= 0.0) continue;
    double inner = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == i || m.weight(j) <= 0.0) continue;
      inner += m.weight(j) * kl_gaussian(m.component(i), m.component(j));
    }
    total += m.weight(i) * inner;
  }
  return total;
}

/// Index of the primary mode (largest weight, ties to the lowest index).
inline Eigen::Index primary_mode(const Mixture& m) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < m.k(); ++i) {
    if (m.weight(i) > m.weight(best)) best = i;
  }
  return best;
}

/// Self Earth Mover's Distance: weighted transport cost from the primary
/// mode to every other component, sum_{j != p} w_j W2(p_p, p_j).
inline double semd(const Mixture& m) {
  if (m.k() < 2) return 0.0;
  const Eigen::Index p = primary_mode(m);
  double total = 0.0;
  for (Eigen::Index j = 0; j < m.k(); ++j) {
    if (j == p) continue;
    total += m.weight(j) * w2_gaussian(m.component(p), m.component(j));
  }
  return total;
}

/// Generalized Jensen-Shannon divergence:
/// H(sum_i w_i p_i) - sum_i w_i H(p_i), clamped at 0 against estimator noise.
inline double jsd(const Mixture& m, const EntropyEstimatorConfig& cfg) {
  if (m.k() < 2) return 0.0;
  double weighted = 0.0;
  for (Eigen::Index i = 0; i < m.k(); ++i)
    weighted += m.weight(i) * entropy_gaussian(m.component(i));
  return std::max(0.0, mixture_entropy(m, cfg) - weighted);
}

/// One CSV row of per-sample metric values with run metadata.
struct MetricRow {
  long sample_id = 0;
  int k = 0;
  std::string label = "-";
  double mce = 0.0;
  double wakld = 0.0;
  double semd = 0.0;
  double jsd = 0.0;
  int jsd_n_samples = 0;  // 0 when the quadrature estimator was used
  std::uint64_t seed = 0;
};

/// All four metrics in one pass; identical values to the individual calls.
inline MetricRow all_metrics(const Mixture& m, const EntropyEstimatorConfig& cfg) {
  MetricRow row;
  row.k = static_cast<int>(m.k());
  row.mce = mce(m);
  row.wakld = wakld(m);
  row.semd = semd(m);
  row.jsd = jsd(m, cfg);
  if (cfg.method == EntropyEstimatorConfig::Method::kMonteCarlo) {
    row.jsd_n_samples = cfg.n_samples;
    row.seed = cfg.seed;
  }
  return row;
}

}  // namespace mixmode
