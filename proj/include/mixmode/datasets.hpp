#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mixmode/rng.hpp"

namespace mixmode {

// Generators for the inverse sine regression dataset and the synthetic
// latent-shift environment whose masked transitions carry ground-truth
// multimodality labels.

struct DatasetMeta {
  std::string generator;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
};

struct Dataset {
  Eigen::MatrixXd inputs;   // n x input_dim
  Eigen::MatrixXd targets;  // n x output_dim
  DatasetMeta meta;
};

/// Inverse sine regression data: t linearly spaced in [-10, 10],
/// y = t + 7 sin(0.7 t) + noise, and the roles exchanged so that the noisy
/// y becomes the input and t the target.
inline Dataset gen_inverse_sine(int n, std::uint64_t seed, double noise_std = 1.0) {
  if (n < 1) throw std::invalid_argument("gen_inverse_sine: n must be >= 1");
  if (noise_std < 0.0) throw std::invalid_argument("gen_inverse_sine: negative noise_std");
  RandomSource rng(derive_seed(seed, "inverse-sine"));
  Dataset ds;
  ds.inputs.resize(n, 1);
  ds.targets.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? -10.0
                            : -10.0 + 20.0 * static_cast<double>(i) /
                                          static_cast<double>(n - 1);
    const double y = t + 7.0 * std::sin(0.7 * t) + noise_std * rng.normal();
    ds.inputs(i, 0) = y;
    ds.targets(i, 0) = t;
  }
  ds.meta.generator = "inverse-sine";
  ds.meta.seed = seed;
  ds.meta.params = {{"n", static_cast<double>(n)}, {"noise_std", noise_std}};
  return ds;
}

enum class ActionToken { kLeft = 0, kRight = 1, kJump = 2, kNoop = 3, kMasked = 4 };

inline constexpr int kValidActions = 4;
inline constexpr int kActionEncodingSize = 5;  // 4 valid actions + MASKED

inline const char* action_name(ActionToken a) {
  switch (a) {
    case ActionToken::kLeft: return "LEFT";
    case ActionToken::kRight: return "RIGHT";
    case ActionToken::kJump: return "JUMP";
    case ActionToken::kNoop: return "NOOP";
    case ActionToken::kMasked: return "MASKED";
  }
  return "?";
}

inline ActionToken action_from_name(std::string_view s) {
  if (s == "LEFT") return ActionToken::kLeft;
  if (s == "RIGHT") return ActionToken::kRight;
  if (s == "JUMP") return ActionToken::kJump;
  if (s == "NOOP") return ActionToken::kNoop;
  if (s == "MASKED") return ActionToken::kMasked;
  throw std::invalid_argument("unknown action token: " + std::string(s));
}

enum class ModalityLabel { kUnimodal, kMultimodal };

inline const char* label_name(ModalityLabel l) {
  return l == ModalityLabel::kUnimodal ? "UNIMODAL" : "MULTIMODAL";
}

inline ModalityLabel label_from_name(std::string_view s) {
  if (s == "UNIMODAL") return ModalityLabel::kUnimodal;
  if (s == "MULTIMODAL") return ModalityLabel::kMultimodal;
  throw std::invalid_argument("unknown modality label: " + std::string(s));
}

/// One latent transition with its ground-truth modality label. The label is
/// MULTIMODAL exactly when the action token is MASKED.
struct TransitionSample {
  Eigen::VectorXd state;
  ActionToken action = ActionToken::kNoop;
  Eigen::VectorXd next_state;
  ModalityLabel label = ModalityLabel::kUnimodal;
};

/// Deterministic latent dynamics: each valid action shifts the state by a
/// fixed offset (plus small observation noise), clamped to a box. Masking
/// the action makes the next state a 4-mode distribution.
struct LatentShiftEnv {
  int d_latent = 8;
  std::array<Eigen::VectorXd, 4> action_offsets;  // indexed by ActionToken
  Eigen::VectorXd box_lo;
  Eigen::VectorXd box_hi;
  double observation_noise_std = 0.05;

  void validate() const {
    if (d_latent < 1) throw std::invalid_argument("LatentShiftEnv: d_latent must be >= 1");
    for (const auto& o : action_offsets) {
      if (o.size() != d_latent)
        throw std::invalid_argument("LatentShiftEnv: offset dimension mismatch");
    }
    if (box_lo.size() != d_latent || box_hi.size() != d_latent ||
        !((box_hi - box_lo).minCoeff() > 0.0))
      throw std::invalid_argument("LatentShiftEnv: invalid state box");
    if (observation_noise_std < 0.0)
      throw std::invalid_argument("LatentShiftEnv: negative noise");
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        if ((action_offsets[i] - action_offsets[j]).norm() < 1.0)
          throw std::invalid_argument(
              "LatentShiftEnv: action offsets closer than the minimum separation of 1");
      }
    }
  }

  /// LEFT/RIGHT shift the first coordinate by -2/+2, JUMP shifts the second
  /// by +2, NOOP leaves the state unchanged; box [-8, 8]^d, noise 0.05.
  static LatentShiftEnv standard(int d_latent = 8) {
    if (d_latent < 2)
      throw std::invalid_argument("LatentShiftEnv::standard: needs d_latent >= 2");
    LatentShiftEnv env;
    env.d_latent = d_latent;
    for (auto& o : env.action_offsets) o = Eigen::VectorXd::Zero(d_latent);
    env.action_offsets[static_cast<int>(ActionToken::kLeft)][0] = -2.0;
    env.action_offsets[static_cast<int>(ActionToken::kRight)][0] = 2.0;
    env.action_offsets[static_cast<int>(ActionToken::kJump)][1] = 2.0;
    env.box_lo = Eigen::VectorXd::Constant(d_latent, -8.0);
    env.box_hi = Eigen::VectorXd::Constant(d_latent, 8.0);
    env.observation_noise_std = 0.05;
    env.validate();
    return env;
  }
};

/// One dynamics step. Masking happens at dataset assembly, never here.
inline Eigen::VectorXd env_step(const LatentShiftEnv& env,
                                const Eigen::Ref<const Eigen::VectorXd>& state,
                                ActionToken action, RandomSource& rng) {
  if (action == ActionToken::kMasked)
    throw std::invalid_argument("env_step: MASKED is not a valid dynamics action");
  if (state.size() != env.d_latent)
    throw std::invalid_argument("env_step: state dimension mismatch");
  Eigen::VectorXd next = state + env.action_offsets[static_cast<int>(action)];
  for (Eigen::Index j = 0; j < next.size(); ++j) {
    next[j] += env.observation_noise_std * rng.normal();
    next[j] = std::min(std::max(next[j], env.box_lo[j]), env.box_hi[j]);
  }
  return next;
}

/// Rolls out trajectories under a uniform random policy and emits n labeled
/// transitions. Within each trajectory the first samples are masked, and the
/// global masked count equals round(mask_fraction * n) (within rounding of
/// the cumulative schedule). Masked samples were still driven by the true
/// action; only the token is replaced.
inline std::vector<TransitionSample> gen_transitions(const LatentShiftEnv& env, int n,
                                                     double mask_fraction,
                                                     std::uint64_t seed,
                                                     int traj_len = 20) {
  env.validate();
  if (n < 1) throw std::invalid_argument("gen_transitions: n must be >= 1");
  if (!(mask_fraction >= 0.0 && mask_fraction <= 1.0))
    throw std::invalid_argument("gen_transitions: mask_fraction must be in [0,1]");
  if (traj_len < 1) throw std::invalid_argument("gen_transitions: traj_len must be >= 1");

  RandomSource rng(derive_seed(seed, "transitions"));
  std::vector<TransitionSample> out;
  out.reserve(static_cast<std::size_t>(n));
  int emitted = 0;
  while (emitted < n) {
    const int len = std::min(traj_len, n - emitted);
    const long masked_before = std::lround(mask_fraction * static_cast<double>(emitted));
    const long masked_after = std::lround(mask_fraction * static_cast<double>(emitted + len));
    const int masked_here = static_cast<int>(masked_after - masked_before);

    Eigen::VectorXd state(env.d_latent);
    for (Eigen::Index j = 0; j < state.size(); ++j)
      state[j] = rng.uniform(env.box_lo[j], env.box_hi[j]);

    for (int step = 0; step < len; ++step) {
      const auto action = static_cast<ActionToken>(rng.below(kValidActions));
      Eigen::VectorXd next = env_step(env, state, action, rng);
      TransitionSample sample;
      sample.state = state;
      const bool masked = step < masked_here;
      sample.action = masked ? ActionToken::kMasked : action;
      sample.label = masked ? ModalityLabel::kMultimodal : ModalityLabel::kUnimodal;
      sample.next_state = next;
      out.push_back(std::move(sample));
      state = std::move(next);
      ++emitted;
    }
  }
  return out;
}

/// Packs transitions into (state ++ one-hot action token, next_state) pairs
/// for MDN training.
inline Dataset transitions_to_dataset(const std::vector<TransitionSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("transitions_to_dataset: empty input");
  const Eigen::Index d = samples.front().state.size();
  Dataset ds;
  ds.inputs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(samples.size()),
                                    d + kActionEncodingSize);
  ds.targets.resize(static_cast<Eigen::Index>(samples.size()), d);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    ds.inputs.block(static_cast<Eigen::Index>(i), 0, 1, d) = s.state.transpose();
    ds.inputs(static_cast<Eigen::Index>(i), d + static_cast<int>(s.action)) = 1.0;
    ds.targets.row(static_cast<Eigen::Index>(i)) = s.next_state.transpose();
  }
  ds.meta.generator = "latent-transitions";
  return ds;
}

}  // namespace mixmode
