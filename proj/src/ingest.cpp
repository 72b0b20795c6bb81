#include "cfpp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cfpp/errors.hpp"

namespace cfpp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name, const std::string& file) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw SchemaError("missing required column \"" + name + "\" in " + file);
    return static_cast<int>(it - header.begin());
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty file (no header): " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return table;
}

double to_real(const std::string& s) { return std::stod(s); }
int to_int(const std::string& s) { return std::stoi(s); }

}  // namespace

const Track* RecordingBundle::find_track(int vehicle_id) const {
  for (const auto& t : tracks)
    if (t.vehicle_id == vehicle_id) return &t;
  return nullptr;
}

RecordingBundle load_recording(const std::string& tracks_path, const std::string& tracks_meta_path,
                               const std::string& recording_meta_path) {
  RecordingBundle bundle;

  {
    CsvTable rec = read_csv(recording_meta_path);
    const int c_id = rec.column("id", recording_meta_path);
    const int c_rate = rec.column("frameRate", recording_meta_path);
    const int c_dur = rec.column("duration", recording_meta_path);
    const int c_loc = rec.column("locationId", recording_meta_path);
    if (rec.rows.empty()) throw SchemaError("no data row in " + recording_meta_path);
    const auto& row = rec.rows.front();
    bundle.meta.recording_id = to_int(row[c_id]);
    bundle.meta.frame_rate_hz = to_real(row[c_rate]);
    bundle.meta.duration_s = to_real(row[c_dur]);
    bundle.meta.location_id = to_int(row[c_loc]);
    if (bundle.meta.frame_rate_hz <= 0.0)
      throw IntegrityError("frameRate must be positive in " + recording_meta_path);
  }

  // tracksMeta is validated for presence of the id column; per-row geometry
  // comes from the tracks file itself.
  {
    CsvTable meta = read_csv(tracks_meta_path);
    (void)meta.column("id", tracks_meta_path);
  }

  CsvTable tracks = read_csv(tracks_path);
  const int c_frame = tracks.column("frame", tracks_path);
  const int c_id = tracks.column("id", tracks_path);
  const int c_x = tracks.column("x", tracks_path);
  const int c_y = tracks.column("y", tracks_path);
  const int c_w = tracks.column("width", tracks_path);
  const int c_h = tracks.column("height", tracks_path);
  const int c_vx = tracks.column("xVelocity", tracks_path);
  const int c_ax = tracks.column("xAcceleration", tracks_path);
  const int c_lane = tracks.column("laneId", tracks_path);
  const int c_prec = tracks.column("precedingId", tracks_path);
  const int c_foll = tracks.column("followingId", tracks_path);

  std::map<int, Track> by_id;
  for (const auto& row : tracks.rows) {
    const int id = to_int(row[c_id]);
    auto& track = by_id[id];
    track.vehicle_id = id;
    track.length = to_real(row[c_w]);
    track.width = to_real(row[c_h]);
    TrackFrame f;
    f.frame = to_int(row[c_frame]);
    f.x = to_real(row[c_x]);
    f.y = to_real(row[c_y]);
    f.speed = to_real(row[c_vx]);
    f.accel = to_real(row[c_ax]);
    f.lane_id = to_int(row[c_lane]);
    f.preceding_id = to_int(row[c_prec]);
    f.following_id = to_int(row[c_foll]);
    if (!std::isfinite(f.speed))
      throw IntegrityError("non-finite speed for vehicle " + std::to_string(id));
    track.frames.push_back(f);
  }

  for (auto& [id, track] : by_id) {
    std::sort(track.frames.begin(), track.frames.end(),
              [](const TrackFrame& a, const TrackFrame& b) { return a.frame < b.frame; });
    for (size_t i = 1; i < track.frames.size(); ++i) {
      if (track.frames[i].frame != track.frames[i - 1].frame + 1)
        throw IntegrityError("non-contiguous frames for vehicle " + std::to_string(id));
    }
    bundle.tracks.push_back(std::move(track));
  }
  return bundle;
}

RecordingBundle normalize_direction(const RecordingBundle& bundle) {
  if (bundle.direction_normalized) return bundle;

  double x_max = -std::numeric_limits<double>::infinity();
  for (const auto& t : bundle.tracks)
    for (const auto& f : t.frames) x_max = std::max(x_max, f.x);

  RecordingBundle out = bundle;
  for (auto& track : out.tracks) {
    if (track.frames.empty()) throw IntegrityError("empty track " + std::to_string(track.vehicle_id));
    double mean_v = 0.0;
    for (const auto& f : track.frames) mean_v += f.speed;
    mean_v /= static_cast<double>(track.frames.size());
    if (mean_v == 0.0)
      throw DomainError("ambiguous travel direction (mean velocity 0) for vehicle " +
                        std::to_string(track.vehicle_id));
    if (mean_v > 0.0) {
      // Forward along +x: the front bumper is the far corner of the box.
      for (auto& f : track.frames) f.x += track.length;
    } else {
      // Mirror so travel is positive-x; the raw corner is already the front.
      for (auto& f : track.frames) {
        f.x = x_max - f.x;
        f.speed = -f.speed;
        f.accel = -f.accel;
      }
    }
  }
  out.direction_normalized = true;
  return out;
}

std::vector<double> slice_series(const Track& track, int frame_lo, int frame_hi, TrackField field) {
  if (frame_lo > frame_hi)
    throw RangeError("slice_series: frame_lo > frame_hi");
  if (!track.covers(frame_lo, frame_hi))
    throw RangeError("slice_series: frames [" + std::to_string(frame_lo) + ", " +
                     std::to_string(frame_hi) + "] outside span of vehicle " +
                     std::to_string(track.vehicle_id));
  std::vector<double> out;
  out.reserve(static_cast<size_t>(frame_hi - frame_lo + 1));
  for (int f = frame_lo; f <= frame_hi; ++f) {
    const TrackFrame& fr = track.at_frame(f);
    switch (field) {
      case TrackField::X: out.push_back(fr.x); break;
      case TrackField::Speed: out.push_back(fr.speed); break;
      case TrackField::Accel: out.push_back(fr.accel); break;
    }
  }
  return out;
}

namespace {

void write_real(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void write_tracks_csv(const RecordingBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,yAcceleration,"
         "laneId,precedingId,followingId\n";
  for (const auto& t : bundle.tracks) {
    for (const auto& f : t.frames) {
      out << f.frame << ',' << t.vehicle_id << ',';
      write_real(out, f.x);
      out << ',';
      write_real(out, f.y);
      out << ',';
      write_real(out, t.length);
      out << ',';
      write_real(out, t.width);
      out << ',';
      write_real(out, f.speed);
      out << ",0,";
      write_real(out, f.accel);
      out << ",0," << f.lane_id << ',' << f.preceding_id << ',' << f.following_id << '\n';
    }
  }
}

void write_tracks_meta_csv(const RecordingBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "id,width,height,initialFrame,finalFrame,numFrames,class\n";
  for (const auto& t : bundle.tracks) {
    out << t.vehicle_id << ',';
    write_real(out, t.length);
    out << ',';
    write_real(out, t.width);
    out << ',' << t.frame_lo() << ',' << t.frame_hi() << ',' << t.frames.size() << ",Car\n";
  }
}

void write_recording_meta_csv(const RecordingMeta& meta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "id,frameRate,locationId,duration\n";
  out << meta.recording_id << ',';
  write_real(out, meta.frame_rate_hz);
  out << ',' << meta.location_id << ',';
  write_real(out, meta.duration_s);
  out << '\n';
}

}  // namespace cfpp
