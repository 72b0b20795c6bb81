#include "cfpp/airl.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cfpp/errors.hpp"

namespace cfpp {

using nlohmann::json;

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;  // 0.5*ln(2*pi)

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

double discriminator_f(const Discriminator& disc, const FeatureScaler& scaler, const CFState& s,
                       const CFState& s_next) {
  const auto fs = scaler.features(s);
  const auto fn = scaler.features(s_next);
  const double g = forward(disc.g, fs)[0];
  const double h_s = forward(disc.h, fs)[0];
  const double h_n = forward(disc.h, fn)[0];
  return g + disc.gamma * h_n - h_s;
}

double discriminator_output(const Discriminator& disc, const FeatureScaler& scaler,
                            const CFState& s, double a, const CFState& s_next, double log_pi) {
  (void)a;  // f depends on states only (state-only reward)
  if (!std::isfinite(log_pi)) throw DomainError("discriminator_output: non-finite log_pi");
  const double f = discriminator_f(disc, scaler, s, s_next);
  if (!std::isfinite(f)) throw DomainError("discriminator_output: non-finite f");
  return sigmoid(f - log_pi);
}

double airl_reward(const Discriminator& disc, const FeatureScaler& scaler, const CFState& s,
                   double a, const CFState& s_next, double log_pi) {
  (void)a;
  if (!std::isfinite(log_pi)) throw DomainError("airl_reward: non-finite log_pi");
  const double f = discriminator_f(disc, scaler, s, s_next);
  if (!std::isfinite(f)) throw DomainError("airl_reward: non-finite f");
  return f - log_pi;  // log D - log(1 - D)
}

double GaussianPolicy::mean_action(std::span<const double> feat) const {
  const double raw = forward(mean_net, feat)[0];
  const double center = 0.5 * (a_lo + a_hi);
  const double half = 0.5 * (a_hi - a_lo);
  return center + half * std::tanh(raw);
}

double GaussianPolicy::log_prob(std::span<const double> feat, double action) const {
  const double mean = mean_action(feat);
  const double sd = std::exp(log_std);
  const double z = (action - mean) / sd;
  return -0.5 * z * z - log_std - kLogSqrt2Pi;
}

std::pair<double, double> GaussianPolicy::sample(std::span<const double> feat, Rng& rng) const {
  const double mean = mean_action(feat);
  const double sd = std::exp(log_std);
  double a = mean + sd * rng.normal();
  a = std::clamp(a, a_lo, a_hi);
  const double z = (a - mean) / sd;
  return {a, -0.5 * z * z - log_std - kLogSqrt2Pi};
}

PPOAgent PPOAgent::create(int input_dim, int hidden, const PpoConfig& cfg, Rng& rng) {
  PPOAgent agent;
  agent.policy.mean_net = Mlp::create({input_dim, hidden, hidden, 1}, rng);
  agent.value = Mlp::create({input_dim, hidden, hidden, 1}, rng);
  agent.policy_opt = AdamState::for_size(agent.policy.mean_net.param_count() + 1, cfg.lr);
  agent.value_opt = AdamState::for_size(agent.value.param_count(), cfg.lr);
  agent.cfg = cfg;
  return agent;
}

PpoDiagnostics ppo_update(PPOAgent& agent, const FeatureScaler& scaler,
                          const std::vector<RolloutSample>& batch, Rng& rng) {
  if (batch.empty()) throw DomainError("ppo_update: empty batch");
  const size_t n = batch.size();
  const PpoConfig& cfg = agent.cfg;

  std::vector<std::array<double, 3>> feats(n);
  std::vector<std::array<double, 3>> feats_next(n);
  for (size_t i = 0; i < n; ++i) {
    feats[i] = scaler.features(batch[i].s);
    feats_next[i] = scaler.features(batch[i].s_next);
  }

  // GAE over each contiguous episode in the batch; truncated ends bootstrap
  // with the value of the successor state, collisions do not.
  std::vector<double> values(n);
  std::vector<double> adv(n);
  std::vector<double> returns(n);
  for (size_t i = 0; i < n; ++i) values[i] = forward(agent.value, feats[i])[0];
  double gae = 0.0;
  for (size_t ii = n; ii-- > 0;) {
    const RolloutSample& t = batch[ii];
    if (t.episode_end) gae = 0.0;
    const double v_next = t.collided ? 0.0 : forward(agent.value, feats_next[ii])[0];
    const double use_next = (t.episode_end && t.collided) ? 0.0 : v_next;
    const double delta = t.reward + cfg.gamma * use_next - values[ii];
    gae = delta + (t.episode_end ? 0.0 : cfg.gamma * cfg.gae_lambda * gae);
    adv[ii] = gae;
    returns[ii] = adv[ii] + values[ii];
  }
  double adv_mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
  double adv_sq = 0.0;
  for (double a : adv) adv_sq += (a - adv_mean) * (a - adv_mean);
  const double adv_sd = std::sqrt(adv_sq / static_cast<double>(n));
  std::vector<double> adv_n(n);
  for (size_t i = 0; i < n; ++i) adv_n[i] = (adv[i] - adv_mean) / (adv_sd + 1e-8);
  bool all_zero = true;
  for (double a : adv)
    if (a != 0.0) all_zero = false;
  if (all_zero) std::fill(adv_n.begin(), adv_n.end(), 0.0);

  for (double a : adv)
    if (!std::isfinite(a)) throw TrainingDivergence("ppo_update: non-finite advantage");

  const double center = 0.5 * (agent.policy.a_lo + agent.policy.a_hi);
  const double half = 0.5 * (agent.policy.a_hi - agent.policy.a_lo);

  PpoDiagnostics diag;
  diag.mean_advantage = adv_mean;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double last_policy_loss = 0.0;
  double last_value_loss = 0.0;

  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    // Fisher-Yates with the shared stream keeps runs reproducible.
    for (size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);

    for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.minibatch)) {
      const size_t end = std::min(n, start + static_cast<size_t>(cfg.minibatch));
      const double inv = 1.0 / static_cast<double>(end - start);

      Gradients pol_grads = zero_gradients(agent.policy.mean_net);
      double grad_log_std = 0.0;
      Gradients val_grads = zero_gradients(agent.value);
      double policy_loss = 0.0;
      double value_loss = 0.0;
      const double sd = std::exp(agent.policy.log_std);

      for (size_t k = start; k < end; ++k) {
        const size_t i = order[k];
        const RolloutSample& t = batch[i];
        const double advantage = adv_n[i];

        ForwardCache pc;
        const double raw = forward(agent.policy.mean_net, feats[i], &pc)[0];
        const double th = std::tanh(raw);
        const double mean = center + half * th;
        const double z = (t.a - mean) / sd;
        const double lp = -0.5 * z * z - agent.policy.log_std - kLogSqrt2Pi;
        const double ratio = std::exp(lp - t.log_pi);
        const double clipped =
            std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
        policy_loss += -std::min(ratio * advantage, clipped * advantage);

        const bool clip_active = (advantage >= 0.0 && ratio > 1.0 + cfg.clip_ratio) ||
                                 (advantage < 0.0 && ratio < 1.0 - cfg.clip_ratio);
        if (!clip_active) {
          const double dloss_dlp = -ratio * advantage;  // d(-ratio*A)/dlp
          const double dlp_dmean = z / sd;
          const double dmean_draw = half * (1.0 - th * th);
          const double upstream = dloss_dlp * dlp_dmean * dmean_draw * inv;
          backward_accumulate(agent.policy.mean_net, pc, std::array<double, 1>{upstream},
                              pol_grads);
          grad_log_std += dloss_dlp * (z * z - 1.0) * inv;
        }

        ForwardCache vc;
        const double v = forward(agent.value, feats[i], &vc)[0];
        const double err = v - returns[i];
        value_loss += 0.5 * err * err;
        backward_accumulate(agent.value, vc, std::array<double, 1>{err * inv}, val_grads);
      }

      std::vector<double> pol_flat = flatten_params(agent.policy.mean_net);
      pol_flat.push_back(agent.policy.log_std);
      std::vector<double> pol_grad_flat = flatten_gradients(agent.policy.mean_net, pol_grads);
      pol_grad_flat.push_back(grad_log_std);
      adam_step(pol_flat, pol_grad_flat, agent.policy_opt);
      agent.policy.log_std = std::clamp(pol_flat.back(), cfg.log_std_lo, cfg.log_std_hi);
      pol_flat.pop_back();
      unflatten_params(agent.policy.mean_net, pol_flat);

      std::vector<double> val_flat = flatten_params(agent.value);
      adam_step(val_flat, flatten_gradients(agent.value, val_grads), agent.value_opt);
      unflatten_params(agent.value, val_flat);

      last_policy_loss = policy_loss * inv;
      last_value_loss = value_loss * inv;
    }
  }
  diag.policy_loss = last_policy_loss;
  diag.value_loss = last_value_loss;
  if (!std::isfinite(last_policy_loss) || !std::isfinite(last_value_loss))
    throw TrainingDivergence("ppo_update: non-finite loss");
  return diag;
}

double eval_episode_loss(std::span<const double> true_ego_speeds,
                         std::span<const double> generated_ego_speeds, bool collided, double floor,
                         double collision_penalty) {
  if (true_ego_speeds.size() != generated_ego_speeds.size() || true_ego_speeds.empty())
    throw DomainError("eval_episode_loss: length mismatch or empty");
  double err = 0.0;
  for (size_t i = 0; i < true_ego_speeds.size(); ++i) {
    const double vt = true_ego_speeds[i];
    if (vt <= 0.0) throw DomainError("eval_episode_loss: nonpositive true speed");
    err += std::fabs(vt - generated_ego_speeds[i]) / vt;
  }
  err /= static_cast<double>(true_ego_speeds.size());
  err = std::max(err, floor);
  return std::log(err) - collision_penalty * (collided ? 1.0 : 0.0);
}

namespace {

struct DiscSample {
  std::array<double, 3> feat_s;
  std::array<double, 3> feat_next;
  double log_pi = 0.0;
  double label = 0.0;
};

// One cross-entropy pass over the sample set; returns mean CE.
double disc_update(Discriminator& disc, std::vector<DiscSample>& samples, int minibatch,
                   AdamState& g_opt, AdamState& h_opt, Rng& rng) {
  const size_t n = samples.size();
  for (size_t i = n - 1; i > 0; --i) std::swap(samples[i], samples[rng.index(i + 1)]);

  double ce_total = 0.0;
  for (size_t start = 0; start < n; start += static_cast<size_t>(minibatch)) {
    const size_t end = std::min(n, start + static_cast<size_t>(minibatch));
    const double inv = 1.0 / static_cast<double>(end - start);
    Gradients g_grads = zero_gradients(disc.g);
    Gradients h_grads = zero_gradients(disc.h);
    for (size_t k = start; k < end; ++k) {
      const DiscSample& smp = samples[k];
      ForwardCache gc;
      ForwardCache hc_s;
      ForwardCache hc_n;
      const double g = forward(disc.g, smp.feat_s, &gc)[0];
      const double h_s = forward(disc.h, smp.feat_s, &hc_s)[0];
      const double h_n = forward(disc.h, smp.feat_next, &hc_n)[0];
      const double x = g + disc.gamma * h_n - h_s - smp.log_pi;
      const double d = sigmoid(x);
      ce_total += smp.label > 0.5 ? softplus(-x) : softplus(x);
      const double dce_dx = (d - smp.label) * inv;
      backward_accumulate(disc.g, gc, std::array<double, 1>{dce_dx}, g_grads);
      backward_accumulate(disc.h, hc_n, std::array<double, 1>{disc.gamma * dce_dx}, h_grads);
      backward_accumulate(disc.h, hc_s, std::array<double, 1>{-dce_dx}, h_grads);
    }
    adam_step(disc.g, g_grads, g_opt);
    adam_step(disc.h, h_grads, h_opt);
  }
  return ce_total / static_cast<double>(n);
}

}  // namespace

std::pair<RewardModel, TrainReport> train_airl(const std::vector<CFSegment>& expert_segments,
                                               const AirlConfig& config,
                                               const CFSegment* eval_segment) {
  if (expert_segments.empty()) throw ConfigError("train_airl: empty expert segment set");
  for (const auto& s : expert_segments)
    if (s.label != expert_segments.front().label)
      throw ConfigError("train_airl: expert segments must share one FV condition");

  Rng rng(config.seed);

  RewardModel model;
  model.scaler = config.scaler;
  model.seed = config.seed;
  model.config_hash = config.config_hash;
  model.disc.gamma = config.gamma;
  model.disc.g = Mlp::create({3, config.hidden, config.hidden, 1}, rng);
  model.disc.h = Mlp::create({3, config.hidden, config.hidden, 1}, rng);

  PpoConfig ppo_cfg = config.ppo;
  ppo_cfg.gamma = config.gamma;
  PPOAgent agent = PPOAgent::create(3, config.hidden, ppo_cfg, rng);
  agent.policy.a_lo = config.action_lo;
  agent.policy.a_hi = config.action_hi;

  AdamState g_opt = AdamState::for_size(model.disc.g.param_count(), config.disc_lr);
  AdamState h_opt = AdamState::for_size(model.disc.h.param_count(), config.disc_lr);

  // Expert transitions straight from the recorded series.
  struct ExpertTransition {
    CFState s;
    double a;
    CFState s_next;
  };
  std::vector<ExpertTransition> expert;
  for (const auto& seg : expert_segments) {
    for (size_t k = 0; k + 1 < seg.length(); ++k) {
      ExpertTransition t;
      t.s = {seg.spacing[k], seg.ego_speed[k], seg.lv_speed[k], seg.rel_speed[k]};
      t.a = seg.ego_accel[k];
      t.s_next = {seg.spacing[k + 1], seg.ego_speed[k + 1], seg.lv_speed[k + 1],
                  seg.rel_speed[k + 1]};
      expert.push_back(t);
    }
  }
  if (expert.empty()) throw ConfigError("train_airl: expert segments have no transitions");

  std::vector<Episode> episodes;
  episodes.reserve(expert_segments.size());
  for (const auto& seg : expert_segments) episodes.push_back(make_episode(seg, config.dt));
  const Episode eval_ep =
      eval_segment != nullptr ? make_episode(*eval_segment, config.dt) : episodes.front();

  TrainReport report;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // 1) Policy rollouts on LV replay episodes.
    std::vector<RolloutSample> batch;
    int collisions = 0;
    while (static_cast<int>(batch.size()) < config.transitions_per_epoch) {
      const Episode& ep = episodes[rng.index(episodes.size())];
      CFState s = ep.initial;
      for (size_t k = 0; k + 1 < ep.lv_speed_trace.size(); ++k) {
        const auto feat = config.scaler.features(s);
        const auto [a, lp] = agent.policy.sample(feat, rng);
        const Transition tr = step(s, a, ep.dt, ep.lv_speed_trace[k + 1], ep.lv_length);
        RolloutSample smp;
        smp.s = tr.s;
        smp.a = a;
        smp.s_next = tr.s_next;
        smp.collided = tr.collided;
        smp.log_pi = lp;
        batch.push_back(smp);
        if (tr.collided) {
          ++collisions;
          break;
        }
        s = tr.s_next;
      }
      batch.back().episode_end = true;
    }

    // 2) Discriminator step: expert transitions labeled 1, policy 0; the
    // density term uses the current policy for both.
    std::vector<DiscSample> disc_samples;
    disc_samples.reserve(batch.size() * 2);
    for (const auto& t : batch) {
      DiscSample d;
      d.feat_s = config.scaler.features(t.s);
      d.feat_next = config.scaler.features(t.s_next);
      d.log_pi = agent.policy.log_prob(d.feat_s, t.a);
      d.label = 0.0;
      disc_samples.push_back(d);
    }
    const size_t n_policy = batch.size();
    for (size_t k = 0; k < n_policy; ++k) {
      const ExpertTransition& t = expert[rng.index(expert.size())];
      DiscSample d;
      d.feat_s = config.scaler.features(t.s);
      d.feat_next = config.scaler.features(t.s_next);
      d.log_pi = agent.policy.log_prob(d.feat_s, t.a);
      d.label = 1.0;
      disc_samples.push_back(d);
    }
    double disc_ce = 0.0;
    for (int pass = 0; pass < config.disc_passes; ++pass)
      disc_ce = disc_update(model.disc, disc_samples, config.disc_minibatch, g_opt, h_opt, rng);

    // 3) AIRL reward on the fresh discriminator, then the PPO step.
    double return_sum = 0.0;
    for (auto& t : batch) {
      const double lp = agent.policy.log_prob(config.scaler.features(t.s), t.a);
      t.reward = discriminator_f(model.disc, config.scaler, t.s, t.s_next) - lp;
      return_sum += t.reward;
    }
    const double mean_return = return_sum / static_cast<double>(batch.size());
    if (!std::isfinite(mean_return) || !std::isfinite(disc_ce))
      throw TrainingDivergence("train_airl: non-finite training signal at epoch " +
                               std::to_string(epoch));
    ppo_update(agent, config.scaler, batch, rng);

    // 4) Deterministic eval rollout against the true ego speeds.
    std::vector<double> gen_speeds{eval_ep.initial.v_e};
    bool eval_collided = false;
    {
      CFState s = eval_ep.initial;
      for (size_t k = 0; k + 1 < eval_ep.lv_speed_trace.size(); ++k) {
        const double a = agent.policy.mean_action(config.scaler.features(s));
        const Transition tr = step(s, a, eval_ep.dt, eval_ep.lv_speed_trace[k + 1], eval_ep.lv_length);
        gen_speeds.push_back(tr.s_next.v_e);
        if (tr.collided) {
          eval_collided = true;
          break;
        }
        s = tr.s_next;
      }
    }
    const std::span<const double> truth(eval_ep.true_ego_speed.data(), gen_speeds.size());
    const double eq12 = eval_episode_loss(truth, gen_speeds, eval_collided, config.eval_floor,
                                          config.collision_penalty);

    EpochStats stats;
    stats.epoch = epoch;
    stats.disc_ce = disc_ce;
    stats.mean_return = mean_return;
    stats.eq12_loss = eq12;
    stats.collisions = collisions;
    report.epochs.push_back(stats);
  }

  model.policy = agent.policy;
  model.value = agent.value;
  return {std::move(model), std::move(report)};
}

RewardGrid reward_grid(const RewardModel& model, double v_l_fixed, int bins, double dy_lo,
                       double dy_hi, double dv_lo, double dv_hi) {
  if (bins < 2) throw DomainError("reward_grid: bins must be >= 2");
  if (dy_hi <= dy_lo || dv_hi <= dv_lo) throw DomainError("reward_grid: invalid ranges");
  RewardGrid grid;
  grid.bins = bins;
  grid.v_l_fixed = v_l_fixed;
  const double dy_step = (dy_hi - dy_lo) / bins;
  const double dv_step = (dv_hi - dv_lo) / bins;
  for (int i = 0; i < bins; ++i) grid.dv_centers.push_back(dv_lo + (i + 0.5) * dv_step);
  for (int j = 0; j < bins; ++j) grid.dy_centers.push_back(dy_lo + (j + 0.5) * dy_step);
  grid.values.assign(static_cast<size_t>(bins) * bins, 0.0);
  grid.valid.assign(static_cast<size_t>(bins) * bins, 0);
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      const double dv = grid.dv_centers[i];
      const double v_e = v_l_fixed - dv;
      if (v_e < 0.0) continue;  // cell marked invalid
      CFState s;
      s.dy_le = grid.dy_centers[j];
      s.dv_le = dv;
      s.v_l = v_l_fixed;
      s.v_e = v_e;
      const size_t idx = static_cast<size_t>(i) * bins + j;
      grid.values[idx] = forward(model.disc.g, model.scaler.features(s))[0];
      grid.valid[idx] = 1;
    }
  }
  return grid;
}

void save_reward_model(const RewardModel& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_mlp(model.disc.g, dir + "/g.json");
  save_mlp(model.disc.h, dir + "/h.json");
  save_mlp(model.policy.mean_net, dir + "/policy_mean.json");
  save_mlp(model.value, dir + "/value.json");
  json manifest{{"gamma", model.disc.gamma},
                {"log_std", model.policy.log_std},
                {"action_lo", model.policy.a_lo},
                {"action_hi", model.policy.a_hi},
                {"scaler",
                 {{"dy_lo", model.scaler.dy_lo},
                  {"dy_hi", model.scaler.dy_hi},
                  {"dv_lo", model.scaler.dv_lo},
                  {"dv_hi", model.scaler.dv_hi},
                  {"ve_lo", model.scaler.ve_lo},
                  {"ve_hi", model.scaler.ve_hi}}},
                {"seed", model.seed},
                {"config_hash", model.config_hash}};
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw IoError("cannot write " + dir + "/manifest.json");
  out << manifest.dump(2) << '\n';
}

RewardModel load_reward_model(const std::string& dir) {
  RewardModel model;
  model.disc.g = load_mlp(dir + "/g.json");
  model.disc.h = load_mlp(dir + "/h.json");
  model.policy.mean_net = load_mlp(dir + "/policy_mean.json");
  model.value = load_mlp(dir + "/value.json");
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw IoError("cannot open " + dir + "/manifest.json");
  json manifest;
  in >> manifest;
  model.disc.gamma = manifest.at("gamma").get<double>();
  model.policy.log_std = manifest.at("log_std").get<double>();
  model.policy.a_lo = manifest.at("action_lo").get<double>();
  model.policy.a_hi = manifest.at("action_hi").get<double>();
  const json& s = manifest.at("scaler");
  model.scaler.dy_lo = s.at("dy_lo").get<double>();
  model.scaler.dy_hi = s.at("dy_hi").get<double>();
  model.scaler.dv_lo = s.at("dv_lo").get<double>();
  model.scaler.dv_hi = s.at("dv_hi").get<double>();
  model.scaler.ve_lo = s.at("ve_lo").get<double>();
  model.scaler.ve_hi = s.at("ve_hi").get<double>();
  model.seed = manifest.at("seed").get<std::uint64_t>();
  model.config_hash = manifest.at("config_hash").get<std::string>();
  return model;
}

void write_train_report_csv(const TrainReport& report, const std::string& path,
                            const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "epoch,disc_ce,mean_return,eq12_loss,collisions\n";
  char buf[64];
  for (const auto& e : report.epochs) {
    out << e.epoch << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", e.disc_ce);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", e.mean_return);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", e.eq12_loss);
    out << buf << ',' << e.collisions << '\n';
  }
}

}  // namespace cfpp
