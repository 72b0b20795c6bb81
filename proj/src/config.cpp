#include "cfpp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cfpp/errors.hpp"
#include "cfpp/io.hpp"

namespace cfpp {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    cfg.entries_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

void KeyValueConfig::override_entry(const std::string& dotted_key, const std::string& value) {
  entries_[dotted_key] = value;
}

bool KeyValueConfig::has(const std::string& dotted_key) const {
  return entries_.count(dotted_key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& dotted_key,
                                       const std::string& fallback) const {
  auto it = entries_.find(dotted_key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_real(const std::string& dotted_key, double fallback) const {
  auto it = entries_.find(dotted_key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config field " + dotted_key + ": not a number: " + it->second);
  }
}

int KeyValueConfig::get_int(const std::string& dotted_key, int fallback) const {
  auto it = entries_.find(dotted_key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config field " + dotted_key + ": not an integer: " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& dotted_key, bool fallback) const {
  auto it = entries_.find(dotted_key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config field " + dotted_key + ": not a boolean: " + it->second);
}

std::vector<double> KeyValueConfig::get_reals(const std::string& dotted_key,
                                              const std::vector<double>& fallback) const {
  auto it = entries_.find(dotted_key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("config field " + dotted_key + ": not a number list: " + it->second);
    }
  }
  return out;
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  PipelineConfig cfg;
  if (!kv.has("run.seed")) throw ConfigError("config field run.seed is mandatory");
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("run.seed", 0));
  cfg.out_dir = kv.get_string("io.out_dir", "out");
  cfg.input_dir = kv.get_string("io.input_dir", cfg.out_dir + "/fixtures");

  cfg.fixture_recordings = kv.get_int("fixtures.recordings", 2);
  cfg.fixture.seed = cfg.seed;
  cfg.fixture.frame_rate_hz = kv.get_real("fixtures.frame_rate_hz", 25.0);
  cfg.fixture.duration_s = kv.get_real("fixtures.duration_s", 60.0);
  cfg.fixture.n_tailgated = kv.get_int("fixtures.n_tailgated", 2);
  cfg.fixture.n_gapped = kv.get_int("fixtures.n_gapped", 2);
  cfg.fixture.ego_gap_s = kv.get_real("fixtures.ego_gap_s", 1.5);
  cfg.fixture.fv_tight_gap_s = kv.get_real("fixtures.fv_tight_gap_s", 0.7);
  cfg.fixture.fv_wide_gap_s = kv.get_real("fixtures.fv_wide_gap_s", 3.6);
  cfg.fixture.accel_noise_sd = kv.get_real("fixtures.accel_noise_sd", 0.3);
  cfg.fixture.include_reverse_direction = kv.get_bool("fixtures.include_reverse_direction", true);

  cfg.criteria.max_lv_distance = kv.get_real("extract.max_lv_distance", 100.0);
  cfg.criteria.min_speed = kv.get_real("extract.min_speed", 10.0 / 3.6);
  cfg.criteria.min_duration = kv.get_real("extract.min_duration", 10.0);
  cfg.criteria.tailgate_gap_max = kv.get_real("extract.tailgate_gap_max", 1.0);
  cfg.criteria.gapped_gap_min = kv.get_real("extract.gapped_gap_min", 3.0);
  cfg.criteria.validate();

  cfg.pairing_threshold = kv.get_real("pair.max_normalized_distance", 1.0);

  cfg.airl.epochs = kv.get_int("train.epochs", 1500);
  cfg.airl.seed = cfg.seed;
  cfg.airl.transitions_per_epoch = kv.get_int("train.transitions_per_epoch", 2048);
  cfg.airl.hidden = kv.get_int("train.hidden", 64);
  cfg.airl.gamma = kv.get_real("train.gamma", 0.99);
  cfg.airl.disc_passes = kv.get_int("train.disc_passes", 2);
  cfg.airl.disc_minibatch = kv.get_int("train.disc_minibatch", 256);
  cfg.airl.disc_lr = kv.get_real("train.disc_lr", 3e-4);
  cfg.airl.ppo.gae_lambda = kv.get_real("train.gae_lambda", 0.95);
  cfg.airl.ppo.clip_ratio = kv.get_real("train.clip_ratio", 0.2);
  cfg.airl.ppo.lr = kv.get_real("train.lr", 3e-4);
  cfg.airl.ppo.epochs_per_batch = kv.get_int("train.ppo_epochs", 10);
  cfg.airl.ppo.minibatch = kv.get_int("train.minibatch", 256);
  cfg.airl.ppo.log_std_lo = kv.get_real("train.log_std_lo", -3.0);
  cfg.airl.ppo.log_std_hi = kv.get_real("train.log_std_hi", 0.25);
  cfg.airl.action_lo = kv.get_real("train.action_lo", -6.0);
  cfg.airl.action_hi = kv.get_real("train.action_hi", 4.0);
  cfg.airl.dt = kv.get_real("train.dt", 0.04);
  cfg.airl.eval_floor = kv.get_real("train.eval_floor", 1e-6);
  cfg.airl.collision_penalty = kv.get_real("train.collision_penalty", 1000.0);
  cfg.airl.scaler.dy_lo = kv.get_real("train.feature_dy_lo", 0.0);
  cfg.airl.scaler.dy_hi = kv.get_real("train.feature_dy_hi", 120.0);
  cfg.airl.scaler.dv_lo = kv.get_real("train.feature_dv_lo", -15.0);
  cfg.airl.scaler.dv_hi = kv.get_real("train.feature_dv_hi", 15.0);
  cfg.airl.scaler.ve_lo = kv.get_real("train.feature_ve_lo", 0.0);
  cfg.airl.scaler.ve_hi = kv.get_real("train.feature_ve_hi", 40.0);

  cfg.reward_bins = kv.get_int("reward_map.bins", 10);
  cfg.fixed_speeds = kv.get_reals("reward_map.fixed_speeds", {4.3, 7.4, 11.0, 20.0});
  cfg.grid_dy_lo = kv.get_real("reward_map.dy_lo", 5.0);
  cfg.grid_dy_hi = kv.get_real("reward_map.dy_hi", 105.0);
  cfg.grid_dv_lo = kv.get_real("reward_map.dv_lo", -10.0);
  cfg.grid_dv_hi = kv.get_real("reward_map.dv_hi", 10.0);

  cfg.density_bins = kv.get_int("density.bins", 20);

  cfg.config_hash = fnv1a_hex(kv.canonical());
  cfg.airl.config_hash = cfg.config_hash;
  return cfg;
}

}  // namespace cfpp
