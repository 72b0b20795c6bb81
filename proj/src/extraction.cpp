#include "cfpp/extraction.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "cfpp/errors.hpp"

namespace cfpp {

using nlohmann::json;

void ExtractionCriteria::validate() const {
  if (max_lv_distance <= 0 || min_speed <= 0 || min_duration <= 0 || tailgate_gap_max <= 0 ||
      gapped_gap_min <= 0)
    throw ConfigError("extraction criteria must all be positive");
  if (tailgate_gap_max >= gapped_gap_min)
    throw ConfigError("tailgate_gap_max must be below gapped_gap_min");
}

const char* to_string(FvState s) {
  switch (s) {
    case FvState::Tailgated: return "Tailgated";
    case FvState::Gapped: return "Gapped";
    case FvState::Neither: return "Neither";
  }
  return "Neither";
}

FvState fv_state_from_string(const std::string& s) {
  if (s == "Tailgated") return FvState::Tailgated;
  if (s == "Gapped") return FvState::Gapped;
  if (s == "Neither") return FvState::Neither;
  throw DomainError("unknown FV state \"" + s + "\"");
}

std::vector<double> time_gap_series(const Track& follower, const Track& leader, int frame_lo,
                                    int frame_hi) {
  if (!follower.covers(frame_lo, frame_hi) || !leader.covers(frame_lo, frame_hi))
    throw RangeError("time_gap_series: span not covered by both tracks");
  std::vector<double> out;
  out.reserve(static_cast<size_t>(frame_hi - frame_lo + 1));
  for (int f = frame_lo; f <= frame_hi; ++f) {
    const double vf = follower.at_frame(f).speed;
    if (vf <= 0.0)
      throw DomainError("time_gap_series: follower speed <= 0 at frame " + std::to_string(f));
    out.push_back((leader.at_frame(f).x - follower.at_frame(f).x) / vf);
  }
  return out;
}

FvState classify_fv_state(const CFSegment& segment, const ExtractionCriteria& criteria) {
  if (segment.fv_time_gap.empty()) throw DomainError("classify_fv_state: empty fv_time_gap series");
  bool all_tight = true;
  bool all_wide = true;
  for (double g : segment.fv_time_gap) {
    if (g > criteria.tailgate_gap_max) all_tight = false;
    if (g < criteria.gapped_gap_min) all_wide = false;
  }
  if (all_tight) return FvState::Tailgated;
  if (all_wide) return FvState::Gapped;
  return FvState::Neither;
}

namespace {

struct FrameCheck {
  bool valid = false;
  int lv_id = 0;
  int fv_id = 0;
};

FrameCheck check_frame(const RecordingBundle& bundle, const Track& ego, int f,
                       const ExtractionCriteria& c) {
  FrameCheck r;
  const TrackFrame& ef = ego.at_frame(f);
  if (ef.preceding_id == 0 || ef.following_id == 0) return r;
  const Track* lv = bundle.find_track(ef.preceding_id);
  const Track* fv = bundle.find_track(ef.following_id);
  if (lv == nullptr || fv == nullptr) return r;
  if (!lv->covers(f, f) || !fv->covers(f, f)) return r;
  const TrackFrame& lf = lv->at_frame(f);
  const TrackFrame& ff = fv->at_frame(f);
  if (lf.lane_id != ef.lane_id || ff.lane_id != ef.lane_id) return r;
  const double gap = lf.x - ef.x;
  if (gap <= 0.0 || gap > c.max_lv_distance) return r;
  if (ef.speed < c.min_speed || lf.speed < c.min_speed) return r;
  if (ff.speed <= 0.0) return r;  // FV time gap undefined otherwise
  r.valid = true;
  r.lv_id = ef.preceding_id;
  r.fv_id = ef.following_id;
  return r;
}

CFSegment build_segment(const RecordingBundle& bundle, const Track& ego, int lv_id, int fv_id,
                        int lo, int hi, const ExtractionCriteria& criteria) {
  const Track& lv = *bundle.find_track(lv_id);
  const Track& fv = *bundle.find_track(fv_id);
  CFSegment s;
  s.recording_id = bundle.meta.recording_id;
  s.lv_id = lv_id;
  s.ego_id = ego.vehicle_id;
  s.fv_id = fv_id;
  s.frame_lo = lo;
  s.frame_hi = hi;
  s.frame_rate_hz = bundle.meta.frame_rate_hz;
  s.lv_length = lv.length;
  s.lv_speed = slice_series(lv, lo, hi, TrackField::Speed);
  s.ego_speed = slice_series(ego, lo, hi, TrackField::Speed);
  s.ego_accel = slice_series(ego, lo, hi, TrackField::Accel);
  const auto lv_x = slice_series(lv, lo, hi, TrackField::X);
  const auto ego_x = slice_series(ego, lo, hi, TrackField::X);
  s.spacing.resize(lv_x.size());
  s.rel_speed.resize(lv_x.size());
  for (size_t i = 0; i < lv_x.size(); ++i) {
    s.spacing[i] = lv_x[i] - ego_x[i];
    s.rel_speed[i] = s.lv_speed[i] - s.ego_speed[i];
  }
  s.fv_time_gap = time_gap_series(fv, ego, lo, hi);
  s.label = classify_fv_state(s, criteria);
  return s;
}

}  // namespace

std::vector<CFSegment> detect_cf_segments(const RecordingBundle& bundle,
                                          const ExtractionCriteria& criteria) {
  criteria.validate();
  if (!bundle.direction_normalized)
    throw DomainError("detect_cf_segments requires a direction-normalized bundle");

  std::vector<CFSegment> out;
  for (const auto& ego : bundle.tracks) {
    const int lo = ego.frame_lo();
    const int hi = ego.frame_hi();
    int f = lo;
    while (f <= hi) {
      FrameCheck start = check_frame(bundle, ego, f, criteria);
      if (!start.valid) {
        ++f;
        continue;
      }
      // Extend the run while every criterion holds and the LV/FV pair is stable.
      int end = f;
      while (end + 1 <= hi) {
        FrameCheck next = check_frame(bundle, ego, end + 1, criteria);
        if (!next.valid || next.lv_id != start.lv_id || next.fv_id != start.fv_id) break;
        ++end;
      }
      const double duration = static_cast<double>(end - f) / bundle.meta.frame_rate_hz;
      if (duration >= criteria.min_duration)
        out.push_back(build_segment(bundle, ego, start.lv_id, start.fv_id, f, end, criteria));
      f = end + 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const CFSegment& a, const CFSegment& b) {
    return std::tie(a.recording_id, a.ego_id, a.frame_lo) <
           std::tie(b.recording_id, b.ego_id, b.frame_lo);
  });
  return out;
}

namespace {

json segment_to_json(const CFSegment& s) {
  return json{{"recording_id", s.recording_id},
              {"lv_id", s.lv_id},
              {"ego_id", s.ego_id},
              {"fv_id", s.fv_id},
              {"frame_lo", s.frame_lo},
              {"frame_hi", s.frame_hi},
              {"frame_rate_hz", s.frame_rate_hz},
              {"lv_length", s.lv_length},
              {"label", to_string(s.label)},
              {"duration_s", s.duration_s()},
              {"lv_speed", s.lv_speed},
              {"ego_speed", s.ego_speed},
              {"ego_accel", s.ego_accel},
              {"spacing", s.spacing},
              {"rel_speed", s.rel_speed},
              {"fv_time_gap", s.fv_time_gap}};
}

CFSegment segment_from_json(const json& j) {
  CFSegment s;
  s.recording_id = j.at("recording_id").get<int>();
  s.lv_id = j.at("lv_id").get<int>();
  s.ego_id = j.at("ego_id").get<int>();
  s.fv_id = j.at("fv_id").get<int>();
  s.frame_lo = j.at("frame_lo").get<int>();
  s.frame_hi = j.at("frame_hi").get<int>();
  s.frame_rate_hz = j.at("frame_rate_hz").get<double>();
  s.lv_length = j.at("lv_length").get<double>();
  s.label = fv_state_from_string(j.at("label").get<std::string>());
  s.lv_speed = j.at("lv_speed").get<std::vector<double>>();
  s.ego_speed = j.at("ego_speed").get<std::vector<double>>();
  s.ego_accel = j.at("ego_accel").get<std::vector<double>>();
  s.spacing = j.at("spacing").get<std::vector<double>>();
  s.rel_speed = j.at("rel_speed").get<std::vector<double>>();
  s.fv_time_gap = j.at("fv_time_gap").get<std::vector<double>>();
  return s;
}

}  // namespace

void write_segments_jsonl(const std::vector<CFSegment>& segments, const std::string& path,
                          const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (const auto& s : segments) out << segment_to_json(s).dump() << '\n';
}

std::vector<CFSegment> read_segments_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<CFSegment> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    out.push_back(segment_from_json(json::parse(line)));
  }
  return out;
}

}  // namespace cfpp
