#include <doctest.h>

#include <cmath>
#include <vector>

#include "cfpp/dtw.hpp"
#include "cfpp/errors.hpp"
#include "cfpp/random.hpp"

using namespace cfpp;

namespace {

// Exhaustive minimum over all monotone warping paths; oracle for short inputs.
double brute_force_dtw(const std::vector<double>& x, const std::vector<double>& y, size_t i,
                       size_t j) {
  const double cost = std::fabs(x[i] - y[j]);
  if (i == 0 && j == 0) return cost;
  double best = std::numeric_limits<double>::infinity();
  if (i > 0 && j > 0) best = std::min(best, brute_force_dtw(x, y, i - 1, j - 1));
  if (i > 0) best = std::min(best, brute_force_dtw(x, y, i - 1, j));
  if (j > 0) best = std::min(best, brute_force_dtw(x, y, i, j - 1));
  return cost + best;
}

CFSegment segment_with_profile(std::vector<double> lv_speed, FvState label) {
  CFSegment s;
  s.lv_speed = std::move(lv_speed);
  s.label = label;
  return s;
}

}  // namespace

TEST_CASE("identical sequences have distance zero") {
  Rng rng(1);
  std::vector<double> x;
  for (int i = 0; i < 30; ++i) x.push_back(rng.uniform(0.0, 30.0));
  const DTWResult r = dtw_distance(x, x);
  CHECK(r.distance == 0.0);
  CHECK(r.normalized_distance == 0.0);
  CHECK(r.path_length >= 30);
}

TEST_CASE("hand-executed tables") {
  const DTWResult a = dtw_distance(std::vector<double>{0.0}, std::vector<double>{1.0, 2.0});
  CHECK(a.distance == doctest::Approx(3.0));
  CHECK(a.path_length == 2);

  const DTWResult b = dtw_distance(std::vector<double>{1.0, 3.0}, std::vector<double>{1.0, 2.0, 3.0});
  CHECK(b.distance == doctest::Approx(1.0));
  CHECK(b.path_length == 3);
  CHECK(b.normalized_distance == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(dtw_distance(std::vector<double>{}, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("symmetry of the distance") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(1 + rng.index(12));
    std::vector<double> y(1 + rng.index(12));
    for (auto& v : x) v = rng.uniform(-5.0, 5.0);
    for (auto& v : y) v = rng.uniform(-5.0, 5.0);
    CHECK(dtw_distance(x, y).distance == doctest::Approx(dtw_distance(y, x).distance).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive-path oracle agreement for short sequences") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(1 + rng.index(8));
    std::vector<double> y(1 + rng.index(8));
    for (auto& v : x) v = rng.uniform(-4.0, 4.0);
    for (auto& v : y) v = rng.uniform(-4.0, 4.0);
    const double oracle = brute_force_dtw(x, y, x.size() - 1, y.size() - 1);
    CHECK(dtw_distance(x, y).distance == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("path length bounds") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(1 + rng.index(10));
    std::vector<double> y(1 + rng.index(10));
    for (auto& v : x) v = rng.uniform(0.0, 1.0);
    for (auto& v : y) v = rng.uniform(0.0, 1.0);
    const DTWResult r = dtw_distance(x, y);
    CHECK(r.path_length >= static_cast<int>(std::max(x.size(), y.size())));
    CHECK(r.path_length <= static_cast<int>(x.size() + y.size() - 1));
  }
}

TEST_CASE("pairing: identical profiles match at distance zero") {
  std::vector<CFSegment> tail{segment_with_profile({10, 11, 12}, FvState::Tailgated)};
  std::vector<CFSegment> gap{segment_with_profile({10, 11, 12}, FvState::Gapped)};
  const auto pairs = pair_segments(tail, gap, 1.0);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].dtw.distance == 0.0);
}

TEST_CASE("pairing: empty pool yields empty output") {
  std::vector<CFSegment> tail{segment_with_profile({10, 11}, FvState::Tailgated)};
  CHECK(pair_segments(tail, {}, 1.0).empty());
  CHECK(pair_segments({}, tail, 1.0).empty());
}

TEST_CASE("greedy matching agrees with brute force on a 2x2 instance") {
  // Profiles engineered so normalized distances are roughly
  // {t0-g0: 0.1, t0-g1: 0.6, t1-g0: 0.5, t1-g1: 5.0 (above threshold)}.
  std::vector<CFSegment> tail{segment_with_profile({10.0, 10.0}, FvState::Tailgated),
                              segment_with_profile({10.5, 10.5}, FvState::Tailgated)};
  std::vector<CFSegment> gap{segment_with_profile({10.1, 10.1}, FvState::Gapped),
                             segment_with_profile({15.0, 15.0}, FvState::Gapped)};
  const auto pairs = pair_segments(tail, gap, 4.6);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].tailgated_index == 0);
  CHECK(pairs[0].gapped_index == 0);
  CHECK(pairs[1].tailgated_index == 1);
  CHECK(pairs[1].gapped_index == 1);
  // Brute force over the two perfect matchings: {t0-g0, t1-g1} has total
  // 0.1 + 4.5, {t0-g1, t1-g0} has 5.0 + 0.4; greedy picks the 0.1 edge first.
  CHECK(pairs[0].dtw.normalized_distance == doctest::Approx(0.1));
}

TEST_CASE("no segment is reused and all pairs respect the threshold") {
  Rng rng(31);
  std::vector<CFSegment> tail;
  std::vector<CFSegment> gap;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> p(10);
    for (auto& v : p) v = rng.uniform(8.0, 22.0);
    tail.push_back(segment_with_profile(p, FvState::Tailgated));
    for (auto& v : p) v = rng.uniform(8.0, 22.0);
    gap.push_back(segment_with_profile(p, FvState::Gapped));
  }
  const double threshold = 3.0;
  const auto pairs = pair_segments(tail, gap, threshold);
  std::vector<bool> t_seen(tail.size(), false);
  std::vector<bool> g_seen(gap.size(), false);
  for (const auto& p : pairs) {
    CHECK(!t_seen[p.tailgated_index]);
    CHECK(!g_seen[p.gapped_index]);
    t_seen[p.tailgated_index] = true;
    g_seen[p.gapped_index] = true;
    CHECK(p.dtw.normalized_distance <= threshold);
  }
}
