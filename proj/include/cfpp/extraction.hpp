#pragma once

#include <string>
#include <vector>

#include "cfpp/ingest.hpp"

namespace cfpp {

struct ExtractionCriteria {
  double max_lv_distance = 100.0;      // m, LV head within this of ego head
  double min_speed = 10.0 / 3.6;       // m/s (10 km/h)
  double min_duration = 10.0;          // s
  double tailgate_gap_max = 1.0;       // s, FV time gap at or below => tailgated
  double gapped_gap_min = 3.0;         // s, FV time gap at or above => gapped

  void validate() const;
};

enum class FvState { Tailgated, Gapped, Neither };

const char* to_string(FvState s);
FvState fv_state_from_string(const std::string& s);

// A contiguous LV/ego/FV car-following episode. All series are per-frame and
// equal-length; spacing is head-to-head (front bumper to front bumper).
struct CFSegment {
  int recording_id = 0;
  int lv_id = 0;
  int ego_id = 0;
  int fv_id = 0;
  int frame_lo = 0;
  int frame_hi = 0;
  double frame_rate_hz = 25.0;
  double lv_length = 0.0;  // m
  FvState label = FvState::Neither;

  std::vector<double> lv_speed;     // m/s
  std::vector<double> ego_speed;    // m/s
  std::vector<double> ego_accel;    // m/s^2
  std::vector<double> spacing;      // m, head-to-head dy_le
  std::vector<double> rel_speed;    // m/s, v_l - v_e
  std::vector<double> fv_time_gap;  // s, FV-to-ego time gap

  size_t length() const { return lv_speed.size(); }
  double duration_s() const { return static_cast<double>(frame_hi - frame_lo) / frame_rate_hz; }
};

// Per-frame time headway between leader and follower head positions,
// h(t) = (x_leader - x_follower) / v_follower.
std::vector<double> time_gap_series(const Track& follower, const Track& leader, int frame_lo,
                                    int frame_hi);

// Scan a direction-normalized bundle for maximal spans meeting every
// criterion and label each by its FV condition.
std::vector<CFSegment> detect_cf_segments(const RecordingBundle& bundle,
                                          const ExtractionCriteria& criteria);

FvState classify_fv_state(const CFSegment& segment, const ExtractionCriteria& criteria);

// JSONL export/import; one object per segment, ordered by
// (recording_id, ego_id, frame_lo).
void write_segments_jsonl(const std::vector<CFSegment>& segments, const std::string& path,
                          const std::string& header_comment);
std::vector<CFSegment> read_segments_jsonl(const std::string& path);

}  // namespace cfpp
