#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixmode/datasets.hpp"
#include "mixmode/gmm.hpp"
#include "mixmode/mdn.hpp"
#include "mixmode/metrics.hpp"
#include "mixmode/parallel.hpp"

namespace mixmode {

// Experiment harnesses: metric curves along the inverse sine input axis, and
// the per-k unimodal vs multimodal separation benchmark on the latent-shift
// environment. Every reported number is reproducible from (config, seed).

inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::kMce, Metric::kWakld,
                                                      Metric::kSemd, Metric::kJsd};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// ---------------------------------------------------------------------------
// Inverse sine experiment

struct SineExperimentConfig {
  int runs = 5;
  int epochs = 1000;
  int k = 5;
  int n_points = 3000;
  double noise_std = 1.0;
  std::vector<double> eval_grid = linspace(-15.0, 15.0, 121);
  std::vector<int> hidden_widths = {64, 64, 64};
  double learning_rate = 1e-3;
  int batch_size = 100;
  int quadrature_points = 20001;
  std::uint64_t seed = 1;
};

struct SineExperimentResult {
  std::vector<double> grid;
  std::array<std::vector<double>, 4> mean_curves;               // by kAllMetrics order
  std::vector<std::array<std::vector<double>, 4>> run_curves;   // [run][metric][grid]
  std::vector<std::uint64_t> run_seeds;
};

/// Per run: fresh dataset and fresh MDN under derived seeds, full training,
/// then all four metrics at every grid input (JSD via 1-D quadrature).
inline SineExperimentResult run_sine_experiment(const SineExperimentConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("run_sine_experiment: runs must be >= 1");
  if (cfg.eval_grid.empty())
    throw std::invalid_argument("run_sine_experiment: empty eval grid");

  SineExperimentResult result;
  result.grid = cfg.eval_grid;
  result.run_curves.resize(static_cast<std::size_t>(cfg.runs));
  result.run_seeds.resize(static_cast<std::size_t>(cfg.runs));
  for (int r = 0; r < cfg.runs; ++r)
    result.run_seeds[static_cast<std::size_t>(r)] = derive_seed(cfg.seed, "sine-run", r);

  parallel_for(cfg.runs, [&](int r) {
    const std::uint64_t run_seed = result.run_seeds[static_cast<std::size_t>(r)];
    try {
      const Dataset data =
          gen_inverse_sine(cfg.n_points, derive_seed(run_seed, "data"), cfg.noise_std);
      MdnConfig mdn_cfg;
      mdn_cfg.input_dim = 1;
      mdn_cfg.output_dim = 1;
      mdn_cfg.n_components = cfg.k;
      mdn_cfg.hidden_widths = cfg.hidden_widths;
      mdn_cfg.seed = derive_seed(run_seed, "model");
      mdn_cfg.learning_rate = cfg.learning_rate;
      mdn_cfg.batch_size = cfg.batch_size;
      mdn_cfg.epochs = cfg.epochs;
      auto [model, history] = train(mdn_cfg, data.inputs, data.targets);

      auto& curves = result.run_curves[static_cast<std::size_t>(r)];
      for (auto& c : curves) c.resize(result.grid.size());
      const auto est = EntropyEstimatorConfig::quadrature(cfg.quadrature_points);
      Eigen::VectorXd x(1);
      for (std::size_t g = 0; g < result.grid.size(); ++g) {
        x[0] = result.grid[g];
        const Mixture m = forward(model, x);
        const MetricRow row = all_metrics(m, est);
        curves[0][g] = row.mce;
        curves[1][g] = row.wakld;
        curves[2][g] = row.semd;
        curves[3][g] = row.jsd;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("sine experiment run with seed " +
                               std::to_string(run_seed) + " failed: " + e.what());
    }
  });

  for (std::size_t mi = 0; mi < 4; ++mi) {
    result.mean_curves[mi].assign(result.grid.size(), 0.0);
    for (int r = 0; r < cfg.runs; ++r)
      for (std::size_t g = 0; g < result.grid.size(); ++g)
        result.mean_curves[mi][g] += result.run_curves[static_cast<std::size_t>(r)][mi][g];
    for (auto& v : result.mean_curves[mi]) v /= static_cast<double>(cfg.runs);
  }
  return result;
}

// ---------------------------------------------------------------------------
// World-model separation benchmark

struct WorldModelBenchConfig {
  std::vector<int> k_grid = {2, 3, 4, 5, 6, 8, 10, 15, 20, 30, 50};
  int repetitions = 3;
  int train_samples = 8000;
  int eval_per_label = 2000;
  int epochs = 60;
  std::vector<int> hidden_widths = {64, 64, 64};
  double learning_rate = 1e-3;
  int batch_size = 100;
  int d_latent = 8;
  int traj_len = 20;
  double mask_fraction = 0.5;
  int jsd_samples = 4096;
  std::uint64_t seed = 1;
};

struct LabelMeans {
  double unimodal = 0.0;
  double multimodal = 0.0;
};

struct BenchRow {
  int k = 0;
  int repetition = 0;
  ModalityLabel label = ModalityLabel::kUnimodal;
  Metric metric = Metric::kMce;
  double value = 0.0;
};

struct SeparationResult {
  std::vector<int> k_values;
  std::array<std::vector<LabelMeans>, 4> means;  // per metric, per k, over repetitions
  std::array<std::vector<bool>, 4> overlap;      // true iff multimodal <= unimodal
  std::vector<BenchRow> rows;                    // long format, one row per cell/label/metric
};

namespace detail {

struct CellResult {
  std::array<LabelMeans, 4> metric_means;
};

}  // namespace detail

/// Trains one MDN per (k, repetition) on mixed masked/unmasked transitions
/// and averages the four metrics over a shared held-out set, separately per
/// ground-truth label. JSD uses the seeded Monte Carlo estimator.
inline SeparationResult run_worldmodel_bench(const WorldModelBenchConfig& cfg) {
  if (cfg.k_grid.empty()) throw std::invalid_argument("run_worldmodel_bench: empty k grid");
  if (cfg.repetitions < 1)
    throw std::invalid_argument("run_worldmodel_bench: repetitions must be >= 1");

  const LatentShiftEnv env = LatentShiftEnv::standard(cfg.d_latent);

  // One training set per repetition (shared across k), one shared eval set.
  std::vector<Dataset> train_sets;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const auto transitions = gen_transitions(env, cfg.train_samples, cfg.mask_fraction,
                                             derive_seed(cfg.seed, "bench-train", rep),
                                             cfg.traj_len);
    train_sets.push_back(transitions_to_dataset(transitions));
  }
  const auto eval_transitions =
      gen_transitions(env, 2 * cfg.eval_per_label, 0.5,
                      derive_seed(cfg.seed, "bench-eval"), cfg.traj_len);
  const Dataset eval_set = transitions_to_dataset(eval_transitions);

  const int n_cells = static_cast<int>(cfg.k_grid.size()) * cfg.repetitions;
  std::vector<detail::CellResult> cells(static_cast<std::size_t>(n_cells));

  parallel_for(n_cells, [&](int cell) {
    const int ki = cell / cfg.repetitions;
    const int rep = cell % cfg.repetitions;
    const int k = cfg.k_grid[static_cast<std::size_t>(ki)];
    try {
      MdnConfig mdn_cfg;
      mdn_cfg.input_dim = cfg.d_latent + kActionEncodingSize;
      mdn_cfg.output_dim = cfg.d_latent;
      mdn_cfg.n_components = k;
      mdn_cfg.hidden_widths = cfg.hidden_widths;
      mdn_cfg.seed = derive_seed(cfg.seed, "bench-model", k, rep);
      mdn_cfg.learning_rate = cfg.learning_rate;
      mdn_cfg.batch_size = cfg.batch_size;
      mdn_cfg.epochs = cfg.epochs;
      const auto& train_set = train_sets[static_cast<std::size_t>(rep)];
      auto [model, history] = train(mdn_cfg, train_set.inputs, train_set.targets);

      std::array<LabelMeans, 4> sums{};
      std::array<long, 2> counts{0, 0};
      for (std::size_t idx = 0; idx < eval_transitions.size(); ++idx) {
        const Mixture m =
            forward(model, eval_set.inputs.row(static_cast<Eigen::Index>(idx)).transpose());
        const auto est = EntropyEstimatorConfig::monte_carlo(
            cfg.jsd_samples, derive_seed(cfg.seed, "bench-jsd", k, rep, idx));
        const MetricRow row = all_metrics(m, est);
        const bool multi = eval_transitions[idx].label == ModalityLabel::kMultimodal;
        counts[multi ? 1 : 0]++;
        const std::array<double, 4> values = {row.mce, row.wakld, row.semd, row.jsd};
        for (std::size_t mi = 0; mi < 4; ++mi) {
          if (multi)
            sums[mi].multimodal += values[mi];
          else
            sums[mi].unimodal += values[mi];
        }
      }
      auto& out = cells[static_cast<std::size_t>(cell)];
      for (std::size_t mi = 0; mi < 4; ++mi) {
        out.metric_means[mi].unimodal = sums[mi].unimodal / static_cast<double>(counts[0]);
        out.metric_means[mi].multimodal = sums[mi].multimodal / static_cast<double>(counts[1]);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("bench cell k=" + std::to_string(k) +
                               " rep=" + std::to_string(rep) + " failed: " + e.what());
    }
  });

  SeparationResult result;
  result.k_values = cfg.k_grid;
  for (std::size_t mi = 0; mi < 4; ++mi) {
    result.means[mi].resize(cfg.k_grid.size());
    result.overlap[mi].resize(cfg.k_grid.size());
  }
  for (std::size_t ki = 0; ki < cfg.k_grid.size(); ++ki) {
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const auto& cell =
          cells[ki * static_cast<std::size_t>(cfg.repetitions) + static_cast<std::size_t>(rep)];
      for (std::size_t mi = 0; mi < 4; ++mi) {
        result.means[mi][ki].unimodal += cell.metric_means[mi].unimodal;
        result.means[mi][ki].multimodal += cell.metric_means[mi].multimodal;
        result.rows.push_back({cfg.k_grid[ki], rep, ModalityLabel::kUnimodal, kAllMetrics[mi],
                               cell.metric_means[mi].unimodal});
        result.rows.push_back({cfg.k_grid[ki], rep, ModalityLabel::kMultimodal,
                               kAllMetrics[mi], cell.metric_means[mi].multimodal});
      }
    }
    for (std::size_t mi = 0; mi < 4; ++mi) {
      result.means[mi][ki].unimodal /= static_cast<double>(cfg.repetitions);
      result.means[mi][ki].multimodal /= static_cast<double>(cfg.repetitions);
      result.overlap[mi][ki] =
          result.means[mi][ki].multimodal <= result.means[mi][ki].unimodal;
    }
  }
  return result;
}

struct SeparationSummary {
  struct PerMetric {
    // Smallest k such that no overlap occurs at it or any larger grid k.
    std::optional<int> min_k_no_overlap;
    std::vector<double> margins;  // multimodal - unimodal, per k
  };
  std::vector<int> k_values;
  std::array<PerMetric, 4> per_metric;  // by kAllMetrics order
};

/// Per-metric smallest k with no overlap at and above it, plus per-k margins.
inline SeparationSummary separation_report(const SeparationResult& result) {
  SeparationSummary summary;
  summary.k_values = result.k_values;
  for (std::size_t mi = 0; mi < 4; ++mi) {
    auto& pm = summary.per_metric[mi];
    pm.margins.resize(result.k_values.size());
    for (std::size_t ki = 0; ki < result.k_values.size(); ++ki)
      pm.margins[ki] =
          result.means[mi][ki].multimodal - result.means[mi][ki].unimodal;
    for (std::size_t ki = result.k_values.size(); ki-- > 0;) {
      if (result.overlap[mi][ki]) break;
      pm.min_k_no_overlap = result.k_values[ki];
    }
  }
  return summary;
}

}  // namespace mixmode
