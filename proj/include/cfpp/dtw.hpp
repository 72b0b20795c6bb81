#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cfpp/extraction.hpp"

namespace cfpp {

struct DTWResult {
  double distance = 0.0;          // cumulative cost D(n, m)
  int path_length = 0;            // cells on the optimal warping path
  double normalized_distance = 0.0;  // distance / path_length
};

// Full-matrix dynamic-programming alignment with d(x_i, y_j) = |x_i - y_j|.
// Path recovery backtracks with tie order diagonal, up, left.
DTWResult dtw_distance(std::span<const double> x, std::span<const double> y);

struct SegmentPair {
  size_t tailgated_index = 0;  // into the tailgated pool
  size_t gapped_index = 0;     // into the gapped pool
  DTWResult dtw;
};

// Greedy globally-ascending matching on LV speed profiles: all cross-pool
// pairs sorted by normalized distance, accepted while both members are unused
// and the threshold holds.
std::vector<SegmentPair> pair_segments(const std::vector<CFSegment>& tailgated_pool,
                                       const std::vector<CFSegment>& gapped_pool,
                                       double max_normalized_distance);

void write_pairs_jsonl(const std::vector<SegmentPair>& pairs,
                       const std::vector<CFSegment>& tailgated_pool,
                       const std::vector<CFSegment>& gapped_pool, const std::string& path,
                       const std::string& header_comment);
std::vector<SegmentPair> read_pairs_jsonl(const std::string& path);

}  // namespace cfpp
