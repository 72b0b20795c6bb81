#include "cfpp/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cfpp/errors.hpp"

namespace cfpp {

using nlohmann::json;

DTWResult dtw_distance(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  const size_t m = y.size();
  if (n == 0 || m == 0) throw DomainError("dtw_distance: empty sequence");

  std::vector<double> dp(n * m);
  auto at = [&](size_t i, size_t j) -> double& { return dp[i * m + j]; };

  at(0, 0) = std::fabs(x[0] - y[0]);
  for (size_t j = 1; j < m; ++j) at(0, j) = at(0, j - 1) + std::fabs(x[0] - y[j]);
  for (size_t i = 1; i < n; ++i) at(i, 0) = at(i - 1, 0) + std::fabs(x[i] - y[0]);
  for (size_t i = 1; i < n; ++i) {
    for (size_t j = 1; j < m; ++j) {
      const double best = std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
      at(i, j) = std::fabs(x[i] - y[j]) + best;
    }
  }

  // Backtrack for the path length; ties broken diagonal, up, left.
  int path_length = 1;
  size_t i = n - 1;
  size_t j = m - 1;
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    ++path_length;
  }

  DTWResult r;
  r.distance = at(n - 1, m - 1);
  r.path_length = path_length;
  r.normalized_distance = r.distance / static_cast<double>(path_length);
  return r;
}

std::vector<SegmentPair> pair_segments(const std::vector<CFSegment>& tailgated_pool,
                                       const std::vector<CFSegment>& gapped_pool,
                                       double max_normalized_distance) {
  if (max_normalized_distance <= 0.0) throw ConfigError("pairing threshold must be positive");

  std::vector<SegmentPair> candidates;
  candidates.reserve(tailgated_pool.size() * gapped_pool.size());
  for (size_t t = 0; t < tailgated_pool.size(); ++t) {
    for (size_t g = 0; g < gapped_pool.size(); ++g) {
      SegmentPair p;
      p.tailgated_index = t;
      p.gapped_index = g;
      p.dtw = dtw_distance(tailgated_pool[t].lv_speed, gapped_pool[g].lv_speed);
      if (p.dtw.normalized_distance <= max_normalized_distance) candidates.push_back(p);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const SegmentPair& a, const SegmentPair& b) {
    return std::tie(a.dtw.normalized_distance, a.tailgated_index, a.gapped_index) <
           std::tie(b.dtw.normalized_distance, b.tailgated_index, b.gapped_index);
  });

  std::vector<bool> t_used(tailgated_pool.size(), false);
  std::vector<bool> g_used(gapped_pool.size(), false);
  std::vector<SegmentPair> out;
  for (const auto& p : candidates) {
    if (t_used[p.tailgated_index] || g_used[p.gapped_index]) continue;
    t_used[p.tailgated_index] = true;
    g_used[p.gapped_index] = true;
    out.push_back(p);
  }
  return out;
}

void write_pairs_jsonl(const std::vector<SegmentPair>& pairs,
                       const std::vector<CFSegment>& tailgated_pool,
                       const std::vector<CFSegment>& gapped_pool, const std::string& path,
                       const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  auto key = [](const CFSegment& s) {
    return json{{"recording_id", s.recording_id},
                {"ego_id", s.ego_id},
                {"frame_lo", s.frame_lo},
                {"frame_hi", s.frame_hi}};
  };
  for (const auto& p : pairs) {
    json j{{"tailgated_index", p.tailgated_index},
           {"gapped_index", p.gapped_index},
           {"tailgated", key(tailgated_pool[p.tailgated_index])},
           {"gapped", key(gapped_pool[p.gapped_index])},
           {"dtw_distance", p.dtw.distance},
           {"dtw_path_length", p.dtw.path_length},
           {"dtw_normalized_distance", p.dtw.normalized_distance}};
    out << j.dump() << '\n';
  }
}

std::vector<SegmentPair> read_pairs_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<SegmentPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const json j = json::parse(line);
    SegmentPair p;
    p.tailgated_index = j.at("tailgated_index").get<size_t>();
    p.gapped_index = j.at("gapped_index").get<size_t>();
    p.dtw.distance = j.at("dtw_distance").get<double>();
    p.dtw.path_length = j.at("dtw_path_length").get<int>();
    p.dtw.normalized_distance = j.at("dtw_normalized_distance").get<double>();
    out.push_back(p);
  }
  return out;
}

}  // namespace cfpp
