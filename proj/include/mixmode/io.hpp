#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixmode/datasets.hpp"
#include "mixmode/gmm.hpp"
#include "mixmode/mdn.hpp"
#include "mixmode/metrics.hpp"

namespace mixmode {

using nlohmann::json;

inline constexpr const char* kCheckpointFormatVersion = "mixmode.checkpoint.v1";

/// Shortest round-trippable decimal rendering of a double, used by every CSV
/// writer so reruns with the same seed stay byte-identical.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write to " + path);
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

inline void write_json_file(const std::string& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << "\n";
}

inline json read_json_file(const std::string& path) {
  auto in = open_input(path);
  json j;
  in >> j;
  return j;
}

// ---------------------------------------------------------------------------
// Mixture wire format: {"weights": [...], "means": [[...]], "stds": [[...]]}

inline json mixture_to_json(const Mixture& m) {
  json weights = json::array();
  json means = json::array();
  json stds = json::array();
  for (Eigen::Index i = 0; i < m.k(); ++i) {
    weights.push_back(m.weight(i));
    const auto& c = m.component(i);
    json mu = json::array();
    json sd = json::array();
    for (Eigen::Index j = 0; j < c.dim(); ++j) {
      mu.push_back(c.mean[j]);
      sd.push_back(c.std[j]);
    }
    means.push_back(std::move(mu));
    stds.push_back(std::move(sd));
  }
  return json{{"weights", std::move(weights)},
              {"means", std::move(means)},
              {"stds", std::move(stds)}};
}

inline Mixture mixture_from_json(const json& j) {
  if (!j.contains("weights") || !j.contains("means") || !j.contains("stds"))
    throw std::invalid_argument("mixture JSON: missing weights/means/stds");
  const auto& jw = j.at("weights");
  const auto& jm = j.at("means");
  const auto& js = j.at("stds");
  if (jw.size() != jm.size() || jw.size() != js.size() || jw.empty())
    throw std::invalid_argument("mixture JSON: inconsistent component counts");
  Eigen::VectorXd weights(static_cast<Eigen::Index>(jw.size()));
  std::vector<GaussianComponent> components;
  components.reserve(jw.size());
  for (std::size_t i = 0; i < jw.size(); ++i) {
    weights[static_cast<Eigen::Index>(i)] = jw[i].get<double>();
    const auto& mu = jm[i];
    const auto& sd = js[i];
    if (mu.size() != sd.size()) throw std::invalid_argument("mixture JSON: dim mismatch");
    Eigen::VectorXd mean(static_cast<Eigen::Index>(mu.size()));
    Eigen::VectorXd stddev(static_cast<Eigen::Index>(sd.size()));
    for (std::size_t d = 0; d < mu.size(); ++d) {
      mean[static_cast<Eigen::Index>(d)] = mu[d].get<double>();
      stddev[static_cast<Eigen::Index>(d)] = sd[d].get<double>();
    }
    components.emplace_back(std::move(mean), std::move(stddev));
  }
  return Mixture(std::move(weights), std::move(components));
}

// ---------------------------------------------------------------------------
// MdnConfig / checkpoint

inline json mdn_config_to_json(const MdnConfig& c) {
  return json{{"input_dim", c.input_dim},
              {"output_dim", c.output_dim},
              {"n_components", c.n_components},
              {"hidden_widths", c.hidden_widths},
              {"seed", c.seed},
              {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs}};
}

inline MdnConfig mdn_config_from_json(const json& j) {
  MdnConfig c;
  c.input_dim = j.at("input_dim").get<int>();
  c.output_dim = j.at("output_dim").get<int>();
  c.n_components = j.at("n_components").get<int>();
  c.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.validate();
  return c;
}

/// Checkpoint: config echo plus one flat parameter array in the canonical
/// order (hidden layers front to back with W row-major then b, then the pi,
/// mu and sigma heads).
inline json checkpoint_to_json(const MdnModel& model) {
  const Eigen::VectorXd flat = to_flat(model);
  json params = json::array();
  for (Eigen::Index i = 0; i < flat.size(); ++i) params.push_back(flat[i]);
  return json{{"format_version", kCheckpointFormatVersion},
              {"config", mdn_config_to_json(model.config)},
              {"params", std::move(params)}};
}

inline MdnModel model_from_checkpoint_json(const json& j) {
  if (!j.contains("format_version") ||
      j.at("format_version").get<std::string>() != kCheckpointFormatVersion)
    throw std::runtime_error(
        "checkpoint format version mismatch: expected " +
        std::string(kCheckpointFormatVersion));
  MdnModel model = init_mdn(mdn_config_from_json(j.at("config")));
  const auto& params = j.at("params");
  Eigen::VectorXd flat(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i)
    flat[static_cast<Eigen::Index>(i)] = params[i].get<double>();
  from_flat(model, flat);
  return model;
}

// ---------------------------------------------------------------------------
// CSV writers / readers

inline void write_history_csv(const std::string& path, const TrainHistory& history) {
  auto out = open_output(path);
  out << "epoch,mean_nll\n";
  for (std::size_t e = 0; e < history.epoch_nll.size(); ++e)
    out << e << "," << fmt_double(history.epoch_nll[e]) << "\n";
}

inline const char* kMetricCsvHeader =
    "sample_id,k,label,mce,wakld,semd,jsd,jsd_n_samples,seed";

inline void write_metric_csv(const std::string& path, const std::vector<MetricRow>& rows) {
  auto out = open_output(path);
  out << kMetricCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.sample_id << "," << r.k << "," << r.label << "," << fmt_double(r.mce) << ","
        << fmt_double(r.wakld) << "," << fmt_double(r.semd) << "," << fmt_double(r.jsd)
        << "," << r.jsd_n_samples << "," << r.seed << "\n";
  }
}

inline void write_dataset_csv(const std::string& path, const Dataset& ds) {
  auto out = open_output(path);
  for (Eigen::Index j = 0; j < ds.inputs.cols(); ++j) out << "input_" << j << ",";
  for (Eigen::Index j = 0; j < ds.targets.cols(); ++j)
    out << "target_" << j << (j + 1 < ds.targets.cols() ? "," : "");
  out << "\n";
  for (Eigen::Index i = 0; i < ds.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.inputs.cols(); ++j)
      out << fmt_double(ds.inputs(i, j)) << ",";
    for (Eigen::Index j = 0; j < ds.targets.cols(); ++j)
      out << fmt_double(ds.targets(i, j)) << (j + 1 < ds.targets.cols() ? "," : "");
    out << "\n";
  }
}

inline void write_transitions_csv(const std::string& path,
                                  const std::vector<TransitionSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("write_transitions_csv: empty input");
  auto out = open_output(path);
  const Eigen::Index d = samples.front().state.size();
  for (Eigen::Index j = 0; j < d; ++j) out << "state_" << j << ",";
  out << "action,";
  for (Eigen::Index j = 0; j < d; ++j) out << "next_state_" << j << ",";
  out << "label\n";
  for (const auto& s : samples) {
    for (Eigen::Index j = 0; j < d; ++j) out << fmt_double(s.state[j]) << ",";
    out << action_name(s.action) << ",";
    for (Eigen::Index j = 0; j < d; ++j) out << fmt_double(s.next_state[j]) << ",";
    out << label_name(s.label) << "\n";
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

/// Reads a dataset CSV written by write_dataset_csv.
inline Dataset load_dataset_csv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset csv: " + path);
  const auto header = detail::split_csv_line(line);
  Eigen::Index n_inputs = 0;
  for (const auto& h : header)
    if (h.rfind("input_", 0) == 0) ++n_inputs;
  const Eigen::Index n_targets = static_cast<Eigen::Index>(header.size()) - n_inputs;
  if (n_inputs < 1 || n_targets < 1)
    throw std::runtime_error("dataset csv header not recognised: " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != n_inputs + n_targets)
      throw std::runtime_error("dataset csv row width mismatch: " + path);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(std::stod(f));
    rows.push_back(std::move(row));
  }
  Dataset ds;
  ds.inputs.resize(static_cast<Eigen::Index>(rows.size()), n_inputs);
  ds.targets.resize(static_cast<Eigen::Index>(rows.size()), n_targets);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < n_inputs; ++j)
      ds.inputs(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < n_targets; ++j)
      ds.targets(static_cast<Eigen::Index>(i), j) =
          rows[i][static_cast<std::size_t>(n_inputs + j)];
  }
  return ds;
}

/// Reads a transitions CSV written by write_transitions_csv.
inline std::vector<TransitionSample> load_transitions_csv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty transitions csv: " + path);
  const auto header = detail::split_csv_line(line);
  Eigen::Index d = 0;
  for (const auto& h : header)
    if (h.rfind("state_", 0) == 0 && h.rfind("next_state_", 0) != 0) ++d;
  if (d < 1 || static_cast<Eigen::Index>(header.size()) != 2 * d + 2)
    throw std::runtime_error("transitions csv header not recognised: " + path);
  std::vector<TransitionSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != 2 * d + 2)
      throw std::runtime_error("transitions csv row width mismatch: " + path);
    TransitionSample s;
    s.state.resize(d);
    s.next_state.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) s.state[j] = std::stod(fields[static_cast<std::size_t>(j)]);
    s.action = action_from_name(fields[static_cast<std::size_t>(d)]);
    for (Eigen::Index j = 0; j < d; ++j)
      s.next_state[j] = std::stod(fields[static_cast<std::size_t>(d + 1 + j)]);
    s.label = label_from_name(fields[static_cast<std::size_t>(2 * d + 1)]);
    samples.push_back(std::move(s));
  }
  return samples;
}

inline json dataset_meta_to_json(const DatasetMeta& meta) {
  return json{{"generator", meta.generator}, {"seed", meta.seed}, {"params", meta.params}};
}

}  // namespace mixmode
