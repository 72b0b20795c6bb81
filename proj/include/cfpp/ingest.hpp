#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cfpp {

struct RecordingMeta {
  int recording_id = 0;
  double frame_rate_hz = 25.0;  // frames per second
  double duration_s = 0.0;
  int location_id = 0;

  double dt() const { return 1.0 / frame_rate_hz; }
};

// One vehicle at one frame. Units are m, m/s, m/s^2 throughout.
// After direction normalization, x is the front-bumper position along the
// travel direction with forward motion positive; before normalization it is
// the raw bounding-box corner as stored in the file.
struct TrackFrame {
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  int lane_id = 0;
  int preceding_id = 0;  // 0 = none
  int following_id = 0;  // 0 = none
};

struct Track {
  int vehicle_id = 0;
  double length = 0.0;  // longitudinal extent (the file's "width" column)
  double width = 0.0;   // lateral extent (the file's "height" column)
  std::vector<TrackFrame> frames;

  int frame_lo() const { return frames.front().frame; }
  int frame_hi() const { return frames.back().frame; }
  bool covers(int lo, int hi) const { return frame_lo() <= lo && hi <= frame_hi(); }
  // Frame record for absolute frame index f; caller must ensure coverage.
  const TrackFrame& at_frame(int f) const { return frames[static_cast<size_t>(f - frame_lo())]; }
};

struct RecordingBundle {
  RecordingMeta meta;
  std::vector<Track> tracks;
  bool direction_normalized = false;

  const Track* find_track(int vehicle_id) const;
};

enum class TrackField { X, Speed, Accel };

// Parse one highD-format recording (tracks, tracksMeta, recordingMeta CSVs).
// Values pass through unconverted; call normalize_direction before analysis.
RecordingBundle load_recording(const std::string& tracks_path, const std::string& tracks_meta_path,
                               const std::string& recording_meta_path);

// Mirror every track whose mean raw longitudinal velocity is negative so all
// travel is positive-x, and shift x to the front bumper. Idempotent.
RecordingBundle normalize_direction(const RecordingBundle& bundle);

std::vector<double> slice_series(const Track& track, int frame_lo, int frame_hi, TrackField field);

// Re-emit a bundle's tracks in the input CSV schema (round-trip support and
// fixture output). Writes full double precision.
void write_tracks_csv(const RecordingBundle& bundle, const std::string& path);
void write_tracks_meta_csv(const RecordingBundle& bundle, const std::string& path);
void write_recording_meta_csv(const RecordingMeta& meta, const std::string& path);

}  // namespace cfpp
