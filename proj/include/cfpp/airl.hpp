#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfpp/env.hpp"
#include "cfpp/extraction.hpp"
#include "cfpp/nn.hpp"

namespace cfpp {

// Affine normalization of the 3-feature network input
// (spacing, relative speed, ego speed) to roughly [0, 1].
struct FeatureScaler {
  double dy_lo = 0.0, dy_hi = 120.0;
  double dv_lo = -15.0, dv_hi = 15.0;
  double ve_lo = 0.0, ve_hi = 40.0;

  std::array<double, 3> features(const CFState& s) const {
    return {(s.dy_le - dy_lo) / (dy_hi - dy_lo), (s.dv_le - dv_lo) / (dv_hi - dv_lo),
            (s.v_e - ve_lo) / (ve_hi - ve_lo)};
  }
};

// AIRL discriminator: reward net g and shaping net h, combined as
// f = g(s) + gamma*h(s') - h(s), D = sigmoid(f - log_pi).
struct Discriminator {
  Mlp g;
  Mlp h;
  double gamma = 0.99;
};

double discriminator_f(const Discriminator& disc, const FeatureScaler& scaler, const CFState& s,
                       const CFState& s_next);
double discriminator_output(const Discriminator& disc, const FeatureScaler& scaler,
                            const CFState& s, double a, const CFState& s_next, double log_pi);
double airl_reward(const Discriminator& disc, const FeatureScaler& scaler, const CFState& s,
                   double a, const CFState& s_next, double log_pi);

// Gaussian policy: tanh-squashed state-dependent mean scaled into the action
// bounds, state-independent learnable log standard deviation.
struct GaussianPolicy {
  Mlp mean_net;
  double log_std = 0.0;
  double a_lo = -6.0;
  double a_hi = 4.0;

  double mean_action(std::span<const double> feat) const;
  double log_prob(std::span<const double> feat, double action) const;
  // Returns (clamped action, log density).
  std::pair<double, double> sample(std::span<const double> feat, Rng& rng) const;
};

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double lr = 3e-4;
  int epochs_per_batch = 10;
  int minibatch = 256;
  // Bounds on the learnable log_std; the entropy term in the generator
  // reward pushes it up without limit otherwise.
  double log_std_lo = -3.0;
  double log_std_hi = 0.25;
};

struct PPOAgent {
  GaussianPolicy policy;
  Mlp value;
  AdamState policy_opt;  // mean-net parameters plus log_std appended
  AdamState value_opt;
  PpoConfig cfg;

  static PPOAgent create(int input_dim, int hidden, const PpoConfig& cfg, Rng& rng);
};

struct RolloutSample {
  CFState s;
  double a = 0.0;
  CFState s_next;
  bool collided = false;
  bool episode_end = false;  // last sample of its episode (bootstrap unless collided)
  double log_pi = 0.0;
  double reward = 0.0;
};

struct PpoDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_advantage = 0.0;
};

PpoDiagnostics ppo_update(PPOAgent& agent, const FeatureScaler& scaler,
                          const std::vector<RolloutSample>& batch, Rng& rng);

struct AirlConfig {
  int epochs = 1500;
  std::uint64_t seed = 1;
  int transitions_per_epoch = 2048;
  int hidden = 64;
  double gamma = 0.99;
  int disc_passes = 2;
  int disc_minibatch = 256;
  double disc_lr = 3e-4;
  PpoConfig ppo;
  FeatureScaler scaler;
  double action_lo = -6.0;
  double action_hi = 4.0;
  double dt = 0.04;
  double eval_floor = 1e-6;
  double collision_penalty = 1000.0;
  std::string config_hash;  // carried into checkpoints
};

struct EpochStats {
  int epoch = 0;
  double disc_ce = 0.0;
  double mean_return = 0.0;
  double eq12_loss = 0.0;
  int collisions = 0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
};

struct RewardModel {
  Discriminator disc;
  GaussianPolicy policy;
  Mlp value;
  FeatureScaler scaler;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Alternating adversarial loop: policy rollouts on the expert segments' LV
// traces, discriminator cross-entropy step, PPO step on the AIRL reward.
// eval_segment (held out) drives the per-epoch trajectory loss; when absent
// the first expert segment is used.
std::pair<RewardModel, TrainReport> train_airl(const std::vector<CFSegment>& expert_segments,
                                               const AirlConfig& config,
                                               const CFSegment* eval_segment = nullptr);

// Trajectory discrepancy: mean relative speed error (floored) through a log,
// minus a large constant when the rollout collided.
double eval_episode_loss(std::span<const double> true_ego_speeds,
                         std::span<const double> generated_ego_speeds, bool collided,
                         double floor = 1e-6, double collision_penalty = 1000.0);

struct RewardGrid {
  int bins = 10;
  double v_l_fixed = 0.0;
  std::vector<double> dv_centers;  // rows
  std::vector<double> dy_centers;  // columns
  std::vector<double> values;      // row-major [dv][dy]
  std::vector<std::uint8_t> valid;

  double at(int i, int j) const { return values[static_cast<size_t>(i) * dy_centers.size() + j]; }
  bool is_valid(int i, int j) const {
    return valid[static_cast<size_t>(i) * dy_centers.size() + j] != 0;
  }
};

// g evaluated at bin centers over (relative speed, spacing) with
// v_e = v_l_fixed - dv; cells with negative ego speed are marked invalid.
RewardGrid reward_grid(const RewardModel& model, double v_l_fixed, int bins, double dy_lo,
                       double dy_hi, double dv_lo, double dv_hi);

void save_reward_model(const RewardModel& model, const std::string& dir);
RewardModel load_reward_model(const std::string& dir);

void write_train_report_csv(const TrainReport& report, const std::string& path,
                            const std::string& header_comment);

}  // namespace cfpp
