#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixmode/gmm.hpp"
#include "mixmode/rng.hpp"

namespace mixmode {

// Feed-forward mixture density network. Dense hidden layers with ReLU, then
// three output heads: component logits (softmax -> weights), means, and
// sigma pre-activations mapped through ELU(s) + 1 + 1e-7 so that every
// standard deviation stays positive. Training is plain minibatch Adam on the
// mean negative log-likelihood, with analytic gradients.

struct MdnConfig {
  int input_dim = 1;
  int output_dim = 1;
  int n_components = 5;
  std::vector<int> hidden_widths = {64, 64, 64};
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  int batch_size = 100;
  int epochs = 1000;

  void validate() const {
    if (input_dim < 1 || output_dim < 1)
      throw std::invalid_argument("MdnConfig: dimensions must be >= 1");
    if (n_components < 1) throw std::invalid_argument("MdnConfig: n_components must be >= 1");
    if (hidden_widths.empty())
      throw std::invalid_argument("MdnConfig: hidden_widths must be non-empty");
    for (int w : hidden_widths)
      if (w < 1) throw std::invalid_argument("MdnConfig: hidden width must be >= 1");
    if (!(learning_rate > 0.0))
      throw std::invalid_argument("MdnConfig: learning_rate must be > 0");
    if (batch_size < 1 || epochs < 0)
      throw std::invalid_argument("MdnConfig: invalid batch_size/epochs");
  }
};

struct DenseLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;  // out
};

/// sigma = ELU(s) + 1 + 1e-7, written as exp(s) + 1e-7 on the negative
/// branch so the cancellation against +1 never loses precision.
inline double sigma_transform(double s) {
  return s > 0.0 ? s + 1.0 + kSigmaFloor : std::exp(s) + kSigmaFloor;
}
inline double sigma_transform_deriv(double s) { return s > 0.0 ? 1.0 : std::exp(s); }

struct MdnModel {
  MdnConfig config;
  std::vector<DenseLayer> hidden;
  DenseLayer pi_head;     // k x H
  DenseLayer mu_head;     // (k*d) x H, component-major rows
  DenseLayer sigma_head;  // (k*d) x H
};

/// Visits every parameter tensor in the canonical (checkpoint) order:
/// hidden layers front to back (W then b), then pi, mu, sigma heads.
template <typename ModelT, typename F>
void for_each_param(ModelT& model, F&& f) {
  for (auto& layer : model.hidden) {
    f(layer.W);
    f(layer.b);
  }
  f(model.pi_head.W);
  f(model.pi_head.b);
  f(model.mu_head.W);
  f(model.mu_head.b);
  f(model.sigma_head.W);
  f(model.sigma_head.b);
}

namespace detail {

inline void he_uniform(Eigen::MatrixXd& w, RandomSource& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
}

}  // namespace detail

/// Seeded initialization: He-style uniform weights scaled by fan-in. Hidden
/// biases get a small uniform jitter (so no ReLU starts pinned to its kink);
/// the mu-head biases are spread over [-1, 1] per component so the
/// components start distinguishable; other head biases are zero.
inline MdnModel init_mdn(const MdnConfig& config) {
  config.validate();
  RandomSource rng(derive_seed(config.seed, "mdn-init"));
  MdnModel model;
  model.config = config;
  int fan_in = config.input_dim;
  for (int width : config.hidden_widths) {
    DenseLayer layer;
    layer.W.resize(width, fan_in);
    detail::he_uniform(layer.W, rng);
    const double bias_limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    layer.b.resize(width);
    for (int i = 0; i < width; ++i) layer.b[i] = rng.uniform(-bias_limit, bias_limit);
    model.hidden.push_back(std::move(layer));
    fan_in = width;
  }
  const int k = config.n_components;
  const int d = config.output_dim;
  auto make_head = [&](int out) {
    DenseLayer head;
    head.W.resize(out, fan_in);
    detail::he_uniform(head.W, rng);
    head.b = Eigen::VectorXd::Zero(out);
    return head;
  };
  model.pi_head = make_head(k);
  model.mu_head = make_head(k * d);
  model.sigma_head = make_head(k * d);
  for (int i = 0; i < k; ++i) {
    const double spread = k == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / (k - 1);
    for (int j = 0; j < d; ++j) model.mu_head.b[i * d + j] = spread;
  }
  return model;
}

namespace detail {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // post-ReLU, per hidden layer (B x width)
  Eigen::MatrixXd logits;                    // B x k
  Eigen::MatrixXd log_pi;                    // B x k
  Eigen::MatrixXd mu;                        // B x (k*d)
  Eigen::MatrixXd s;                         // B x (k*d), sigma pre-activations
  Eigen::MatrixXd sigma;                     // B x (k*d)
};

inline ForwardCache forward_batch(const MdnModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& x) {
  ForwardCache cache;
  Eigen::MatrixXd h = x;
  for (const auto& layer : model.hidden) {
    h = ((h * layer.W.transpose()).rowwise() + layer.b.transpose()).cwiseMax(0.0);
    cache.activations.push_back(h);
  }
  cache.logits = (h * model.pi_head.W.transpose()).rowwise() + model.pi_head.b.transpose();
  cache.log_pi = cache.logits;
  for (Eigen::Index r = 0; r < cache.log_pi.rows(); ++r) {
    const double mx = cache.log_pi.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < cache.log_pi.cols(); ++i)
      sum += std::exp(cache.log_pi(r, i) - mx);
    cache.log_pi.row(r).array() -= mx + std::log(sum);
  }
  cache.mu = (h * model.mu_head.W.transpose()).rowwise() + model.mu_head.b.transpose();
  cache.s = (h * model.sigma_head.W.transpose()).rowwise() + model.sigma_head.b.transpose();
  cache.sigma = cache.s.unaryExpr([](double v) { return sigma_transform(v); });
  return cache;
}

// log N(y_r | mu_ri, diag(sigma_ri^2)) per row r and component i.
inline Eigen::MatrixXd component_log_densities(const ForwardCache& cache,
                                               const Eigen::Ref<const Eigen::MatrixXd>& y,
                                               int k, int d) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd logn(n, k);
  for (int i = 0; i < k; ++i) {
    const auto mu_i = cache.mu.middleCols(i * d, d).array();
    const auto sig_i = cache.sigma.middleCols(i * d, d).array();
    const auto z = (y.array() - mu_i) / sig_i;
    logn.col(i) = -0.5 * z.square().rowwise().sum() - sig_i.log().rowwise().sum() -
                  0.5 * static_cast<double>(d) * kLogTwoPi;
  }
  return logn;
}

}  // namespace detail

/// Single-input forward pass producing a valid Mixture.
inline Mixture forward(const MdnModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.config.input_dim)
    throw std::invalid_argument("forward: input dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
  const auto cache = detail::forward_batch(model, x.transpose());
  const int k = model.config.n_components;
  const int d = model.config.output_dim;
  Eigen::VectorXd weights(k);
  for (int i = 0; i < k; ++i) weights[i] = std::exp(cache.log_pi(0, i));
  weights /= weights.sum();
  std::vector<GaussianComponent> components;
  components.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    components.emplace_back(cache.mu.block(0, i * d, 1, d).transpose(),
                            cache.sigma.block(0, i * d, 1, d).transpose());
  }
  return Mixture(std::move(weights), std::move(components));
}

/// Negative log-likelihood of one target under a predicted mixture.
inline double nll(const Mixture& m, const Eigen::Ref<const Eigen::VectorXd>& y) {
  return -log_pdf(m, y);
}

struct MdnGradients {
  std::vector<DenseLayer> hidden;
  DenseLayer pi_head;
  DenseLayer mu_head;
  DenseLayer sigma_head;
};

/// Analytic gradient of the mean batch NLL with respect to every parameter,
/// via the posterior-responsibility decomposition through the log-sum-exp.
/// Returns the gradients together with the mean batch NLL.
inline std::pair<MdnGradients, double> grad(const MdnModel& model,
                                            const Eigen::Ref<const Eigen::MatrixXd>& x,
                                            const Eigen::Ref<const Eigen::MatrixXd>& y) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw std::invalid_argument("grad: empty batch");
  if (x.cols() != model.config.input_dim || y.cols() != model.config.output_dim ||
      y.rows() != n)
    throw std::invalid_argument("grad: batch shape mismatch");

  const int k = model.config.n_components;
  const int d = model.config.output_dim;
  const auto cache = detail::forward_batch(model, x);
  const Eigen::MatrixXd logn = detail::component_log_densities(cache, y, k, d);
  Eigen::MatrixXd joint = cache.log_pi + logn;  // log w_i + log N_i
  Eigen::VectorXd logp(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mx = joint.row(r).maxCoeff();
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += std::exp(joint(r, i) - mx);
    logp[r] = mx + std::log(sum);
  }
  const double mean_nll = -logp.mean();

  // Responsibilities r_i = exp(joint_i - logp).
  Eigen::MatrixXd resp = (joint.colwise() - logp).array().exp();
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd d_logits = (cache.log_pi.array().exp().matrix() - resp) * inv_n;
  Eigen::MatrixXd d_mu(n, k * d);
  Eigen::MatrixXd d_s(n, k * d);
  for (int i = 0; i < k; ++i) {
    const auto mu_i = cache.mu.middleCols(i * d, d).array();
    const auto sig_i = cache.sigma.middleCols(i * d, d).array();
    const auto diff = mu_i - y.array();
    const auto r_i = resp.col(i).array();
    d_mu.middleCols(i * d, d) =
        ((diff / sig_i.square()).colwise() * r_i * inv_n).matrix();
    const auto d_sigma =
        ((1.0 / sig_i - diff.square() / sig_i.cube()).colwise() * r_i * inv_n);
    d_s.middleCols(i * d, d) =
        (d_sigma *
         cache.s.middleCols(i * d, d).array().unaryExpr(
             [](double v) { return sigma_transform_deriv(v); }))
            .matrix();
  }

  MdnGradients grads;
  const Eigen::MatrixXd& h_last = cache.activations.back();
  auto head_grad = [&](const Eigen::MatrixXd& d_out, const DenseLayer& head) {
    DenseLayer g;
    g.W = d_out.transpose() * h_last;
    g.b = d_out.colwise().sum().transpose();
    (void)head;
    return g;
  };
  grads.pi_head = head_grad(d_logits, model.pi_head);
  grads.mu_head = head_grad(d_mu, model.mu_head);
  grads.sigma_head = head_grad(d_s, model.sigma_head);

  Eigen::MatrixXd d_h = d_logits * model.pi_head.W + d_mu * model.mu_head.W +
                        d_s * model.sigma_head.W;
  grads.hidden.resize(model.hidden.size());
  for (int l = static_cast<int>(model.hidden.size()) - 1; l >= 0; --l) {
    const Eigen::MatrixXd d_z =
        (cache.activations[static_cast<std::size_t>(l)].array() > 0.0)
            .select(d_h, Eigen::MatrixXd::Zero(n, d_h.cols()));
    const Eigen::MatrixXd& input =
        l == 0 ? static_cast<const Eigen::MatrixXd&>(x)
               : cache.activations[static_cast<std::size_t>(l - 1)];
    grads.hidden[static_cast<std::size_t>(l)].W = d_z.transpose() * input;
    grads.hidden[static_cast<std::size_t>(l)].b = d_z.colwise().sum().transpose();
    if (l > 0) d_h = d_z * model.hidden[static_cast<std::size_t>(l)].W;
  }
  return {std::move(grads), mean_nll};
}

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamTensorState {
  Eigen::ArrayXXd m;
  Eigen::ArrayXXd v;
};

struct AdamState {
  long step = 0;
  std::vector<AdamTensorState> tensors;
};

/// One bias-corrected Adam update on a single tensor. `step` counts from 1.
template <typename ParamT, typename GradT>
void adam_step(Eigen::MatrixBase<ParamT>& param, const Eigen::MatrixBase<GradT>& gradient,
               AdamTensorState& state, long step, const AdamParams& p) {
  state.m = p.beta1 * state.m + (1.0 - p.beta1) * gradient.array();
  state.v = p.beta2 * state.v + (1.0 - p.beta2) * gradient.array().square();
  const double corr1 = 1.0 - std::pow(p.beta1, static_cast<double>(step));
  const double corr2 = 1.0 - std::pow(p.beta2, static_cast<double>(step));
  param.derived().array() -= p.learning_rate * (state.m / corr1) /
                             ((state.v / corr2).sqrt() + p.epsilon);
}

inline AdamState init_adam(const MdnModel& model) {
  AdamState state;
  for_each_param(model, [&](const auto& t) {
    state.tensors.push_back({Eigen::ArrayXXd::Zero(t.rows(), t.cols()),
                             Eigen::ArrayXXd::Zero(t.rows(), t.cols())});
  });
  return state;
}

/// Applies one Adam step over all model parameters.
inline void adam_apply(MdnModel& model, const MdnGradients& grads, AdamState& state,
                       const AdamParams& params) {
  ++state.step;
  std::size_t idx = 0;
  auto update = [&](auto& param, const auto& gradient) {
    adam_step(param, gradient, state.tensors[idx], state.step, params);
    ++idx;
  };
  for (std::size_t l = 0; l < model.hidden.size(); ++l) {
    update(model.hidden[l].W, grads.hidden[l].W);
    update(model.hidden[l].b, grads.hidden[l].b);
  }
  update(model.pi_head.W, grads.pi_head.W);
  update(model.pi_head.b, grads.pi_head.b);
  update(model.mu_head.W, grads.mu_head.W);
  update(model.mu_head.b, grads.mu_head.b);
  update(model.sigma_head.W, grads.sigma_head.W);
  update(model.sigma_head.b, grads.sigma_head.b);
}

struct TrainHistory {
  std::vector<double> epoch_nll;
  double final_nll = 0.0;
  std::uint64_t seed = 0;
  MdnConfig config;
};

/// Minibatch Adam over shuffled epochs; fully determined by (config, data).
inline std::pair<MdnModel, TrainHistory> train(const MdnConfig& config,
                                               const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                               const Eigen::Ref<const Eigen::MatrixXd>& targets) {
  config.validate();
  const Eigen::Index n = inputs.rows();
  if (n < 1) throw std::invalid_argument("train: empty dataset");
  if (inputs.cols() != config.input_dim || targets.cols() != config.output_dim ||
      targets.rows() != n)
    throw std::invalid_argument("train: dataset shape does not match config");

  MdnModel model = init_mdn(config);
  AdamState adam = init_adam(model);
  AdamParams adam_params;
  adam_params.learning_rate = config.learning_rate;
  RandomSource shuffle_rng(derive_seed(config.seed, "mdn-shuffle"));

  TrainHistory history;
  history.seed = config.seed;
  history.config = config;
  history.epoch_nll.reserve(static_cast<std::size_t>(config.epochs));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    fisher_yates(order, shuffle_rng);
    double nll_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd xb(b, config.input_dim);
      Eigen::MatrixXd yb(b, config.output_dim);
      for (Eigen::Index r = 0; r < b; ++r) {
        xb.row(r) = inputs.row(order[static_cast<std::size_t>(start + r)]);
        yb.row(r) = targets.row(order[static_cast<std::size_t>(start + r)]);
      }
      auto [grads, batch_nll] = grad(model, xb, yb);
      adam_apply(model, grads, adam, adam_params);
      nll_sum += batch_nll * static_cast<double>(b);
    }
    history.epoch_nll.push_back(nll_sum / static_cast<double>(n));
  }
  history.final_nll = history.epoch_nll.empty() ? 0.0 : history.epoch_nll.back();
  return {std::move(model), std::move(history)};
}

/// Mean NLL of a model over a dataset (no training), for held-out scoring.
inline double mean_nll(const MdnModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                       const Eigen::Ref<const Eigen::MatrixXd>& targets) {
  const auto cache = detail::forward_batch(model, inputs);
  const Eigen::MatrixXd logn = detail::component_log_densities(
      cache, targets, model.config.n_components, model.config.output_dim);
  const Eigen::MatrixXd joint = cache.log_pi + logn;
  double total = 0.0;
  for (Eigen::Index r = 0; r < joint.rows(); ++r) {
    const double mx = joint.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < joint.cols(); ++i) sum += std::exp(joint(r, i) - mx);
    total -= mx + std::log(sum);
  }
  return total / static_cast<double>(joint.rows());
}

/// Total parameter count, matching the canonical flat order.
inline std::size_t param_count(const MdnModel& model) {
  std::size_t count = 0;
  for_each_param(model, [&](const auto& t) { count += static_cast<std::size_t>(t.size()); });
  return count;
}

/// Flattens parameters in the canonical order (each tensor row-major).
inline Eigen::VectorXd to_flat(const MdnModel& model) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(param_count(model)));
  Eigen::Index pos = 0;
  for_each_param(model, [&](const auto& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) flat[pos++] = t(r, c);
  });
  return flat;
}

inline void from_flat(MdnModel& model, const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() != static_cast<Eigen::Index>(param_count(model)))
    throw std::invalid_argument("from_flat: parameter count mismatch");
  Eigen::Index pos = 0;
  for_each_param(model, [&](auto& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = flat[pos++];
  });
}

}  // namespace mixmode
