#include "cfpp/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cfpp/errors.hpp"
#include "cfpp/random.hpp"

namespace cfpp {

double ScriptedFollower::act(double head_spacing, double v_self, double v_lead,
                             double lead_length) const {
  const double desired = head_gap ? target_gap_s * v_self : lead_length + target_gap_s * v_self;
  const double a = kp * (head_spacing - desired) + kv * (v_lead - v_self);
  return std::clamp(a, a_lo, a_hi);
}

double ScriptedFollower::preferred_head_spacing(double v, double lead_length) const {
  return head_gap ? target_gap_s * v : lead_length + target_gap_s * v;
}

namespace {

struct SimTrack {
  int id = 0;
  int lane = 0;
  std::vector<double> x_front;  // canonical, forward-positive
  std::vector<double> speed;
  std::vector<double> accel;
  int preceding = 0;
  int following = 0;
};

// Speeds integrate by v' = max(0, v + a*dt), positions by the trapezoid rule,
// exactly like the environment step, so replays are bit-faithful.
void integrate(SimTrack& t, double dt) {
  for (size_t k = 0; k + 1 < t.speed.size(); ++k) {
    t.speed[k + 1] = std::max(0.0, t.speed[k] + t.accel[k] * dt);
    t.x_front[k + 1] = t.x_front[k] + 0.5 * (t.speed[k] + t.speed[k + 1]) * dt;
  }
}

}  // namespace

RecordingBundle generate_fixture_recording(const FixtureConfig& config) {
  if (config.n_tailgated + config.n_gapped < 1)
    throw ConfigError("fixture: need at least one triplet");
  const int n_frames = static_cast<int>(std::lround(config.duration_s * config.frame_rate_hz));
  if (n_frames < 2) throw ConfigError("fixture: duration too short");
  const double dt = 1.0 / config.frame_rate_hz;
  Rng rng(config.seed);

  RecordingBundle bundle;
  bundle.meta.recording_id = config.recording_id;
  bundle.meta.frame_rate_hz = config.frame_rate_hz;
  bundle.meta.duration_s = config.duration_s;
  bundle.meta.location_id = 1;

  const int n_triplets = config.n_tailgated + config.n_gapped;
  int next_id = 1;
  for (int trip = 0; trip < n_triplets; ++trip) {
    const bool tight = trip < config.n_tailgated;
    const bool reverse = config.include_reverse_direction && trip == n_triplets - 1;
    const int lane = reverse ? 5 + trip : 2 + trip;

    const double base = rng.uniform(config.base_speed_lo, config.base_speed_hi);
    const double amp = rng.uniform(config.amp_lo, config.amp_hi);
    const double period = rng.uniform(config.period_lo, config.period_hi);
    const double phase = rng.uniform(0.0, period);

    SimTrack lv;
    lv.id = next_id++;
    lv.lane = lane;
    lv.x_front.assign(n_frames, 0.0);
    lv.speed.assign(n_frames, 0.0);
    lv.accel.assign(n_frames, 0.0);
    lv.x_front[0] = 600.0;
    for (int k = 0; k < n_frames; ++k)
      lv.speed[k] = base + amp * std::sin(2.0 * M_PI * (k * dt + phase) / period);
    for (int k = 0; k + 1 < n_frames; ++k) lv.accel[k] = (lv.speed[k + 1] - lv.speed[k]) / dt;
    for (int k = 0; k + 1 < n_frames; ++k)
      lv.x_front[k + 1] = lv.x_front[k] + 0.5 * (lv.speed[k] + lv.speed[k + 1]) * dt;

    ScriptedFollower expert;
    expert.target_gap_s = config.ego_gap_s;
    SimTrack ego;
    ego.id = next_id++;
    ego.lane = lane;
    ego.x_front.assign(n_frames, 0.0);
    ego.speed.assign(n_frames, 0.0);
    ego.accel.assign(n_frames, 0.0);
    ego.speed[0] = lv.speed[0];
    ego.x_front[0] =
        lv.x_front[0] - expert.preferred_head_spacing(ego.speed[0], config.vehicle_length);
    for (int k = 0; k + 1 < n_frames; ++k) {
      const double spacing = lv.x_front[k] - ego.x_front[k];
      double a = expert.act(spacing, ego.speed[k], lv.speed[k], config.vehicle_length);
      a = std::clamp(a + config.accel_noise_sd * rng.normal(), expert.a_lo, expert.a_hi);
      ego.accel[k] = a;
      ego.speed[k + 1] = std::max(0.0, ego.speed[k] + a * dt);
      ego.x_front[k + 1] = ego.x_front[k] + 0.5 * (ego.speed[k] + ego.speed[k + 1]) * dt;
    }

    ScriptedFollower fv_ctl;
    fv_ctl.target_gap_s = tight ? config.fv_tight_gap_s : config.fv_wide_gap_s;
    fv_ctl.head_gap = true;
    SimTrack fv;
    fv.id = next_id++;
    fv.lane = lane;
    fv.x_front.assign(n_frames, 0.0);
    fv.speed.assign(n_frames, 0.0);
    fv.accel.assign(n_frames, 0.0);
    fv.speed[0] = ego.speed[0];
    fv.x_front[0] = ego.x_front[0] - fv_ctl.preferred_head_spacing(fv.speed[0], config.vehicle_length);
    for (int k = 0; k + 1 < n_frames; ++k) {
      const double spacing = ego.x_front[k] - fv.x_front[k];
      fv.accel[k] = fv_ctl.act(spacing, fv.speed[k], ego.speed[k], config.vehicle_length);
      fv.speed[k + 1] = std::max(0.0, fv.speed[k] + fv.accel[k] * dt);
      fv.x_front[k + 1] = fv.x_front[k] + 0.5 * (fv.speed[k] + fv.speed[k + 1]) * dt;
    }

    lv.preceding = 0;
    lv.following = ego.id;
    ego.preceding = lv.id;
    ego.following = fv.id;
    fv.preceding = ego.id;
    fv.following = 0;

    for (SimTrack* st : {&lv, &ego, &fv}) {
      Track track;
      track.vehicle_id = st->id;
      track.length = config.vehicle_length;
      track.width = config.vehicle_width;
      track.frames.resize(n_frames);
      for (int k = 0; k < n_frames; ++k) {
        TrackFrame& f = track.frames[static_cast<size_t>(k)];
        f.frame = k + 1;
        f.y = 4.0 * lane;
        f.lane_id = lane;
        f.preceding_id = st->preceding;
        f.following_id = st->following;
        if (reverse) {
          // Raw -x travel: the box corner is the front bumper.
          f.x = 1500.0 - st->x_front[static_cast<size_t>(k)];
          f.speed = -st->speed[static_cast<size_t>(k)];
          f.accel = -st->accel[static_cast<size_t>(k)];
        } else {
          f.x = st->x_front[static_cast<size_t>(k)] - config.vehicle_length;
          f.speed = st->speed[static_cast<size_t>(k)];
          f.accel = st->accel[static_cast<size_t>(k)];
        }
      }
      bundle.tracks.push_back(std::move(track));
    }
  }
  return bundle;
}

void write_fixture_recording(const RecordingBundle& bundle, const std::string& dir,
                             const std::string& prefix) {
  std::filesystem::create_directories(dir);
  write_tracks_csv(bundle, dir + "/" + prefix + "_tracks.csv");
  write_tracks_meta_csv(bundle, dir + "/" + prefix + "_tracksMeta.csv");
  write_recording_meta_csv(bundle.meta, dir + "/" + prefix + "_recordingMeta.csv");
}

}  // namespace cfpp
