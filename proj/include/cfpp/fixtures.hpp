#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfpp/ingest.hpp"

namespace cfpp {

// Constant-time-gap follower used to script expert (and FV) behavior.
// When head_gap is true the target is a head-to-head time gap, otherwise a
// bumper-to-bumper gap of target_gap_s * own speed.
struct ScriptedFollower {
  double target_gap_s = 1.5;
  double kp = 0.5;   // 1/s^2, spacing-error gain
  double kv = 0.9;   // 1/s, closing-speed gain
  double a_lo = -6.0;
  double a_hi = 4.0;
  bool head_gap = false;

  double act(double head_spacing, double v_self, double v_lead, double lead_length) const;
  // Equilibrium head-to-head spacing at speed v.
  double preferred_head_spacing(double v, double lead_length) const;
};

struct FixtureConfig {
  std::uint64_t seed = 7;
  int recording_id = 1;
  double frame_rate_hz = 25.0;
  double duration_s = 60.0;
  int n_tailgated = 2;         // triplets whose FV keeps a tight gap
  int n_gapped = 2;            // triplets whose FV keeps a wide gap
  double ego_gap_s = 1.5;      // expert ego target (bumper gap)
  double fv_tight_gap_s = 0.7;  // head time gap, sustained below 1 s
  double fv_wide_gap_s = 3.6;   // head time gap, sustained above 3 s
  double accel_noise_sd = 0.3;  // m/s^2 on the ego expert
  double base_speed_lo = 12.0;
  double base_speed_hi = 22.0;
  double amp_lo = 0.5;
  double amp_hi = 2.5;
  double period_lo = 15.0;
  double period_hi = 40.0;
  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  bool include_reverse_direction = true;  // one triplet stored in raw -x travel
};

// A synthetic recording in the raw input schema (corner positions, signed
// velocities): one LV/ego/FV triplet per lane, ego driven by the scripted
// expert. Speeds integrate exactly like the environment step.
RecordingBundle generate_fixture_recording(const FixtureConfig& config);

// Writes <prefix>_tracks.csv, <prefix>_tracksMeta.csv, <prefix>_recordingMeta.csv.
void write_fixture_recording(const RecordingBundle& bundle, const std::string& dir,
                             const std::string& prefix);

}  // namespace cfpp
