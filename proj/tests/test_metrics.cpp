#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "cfpp/errors.hpp"
#include "cfpp/metrics.hpp"
#include "cfpp/random.hpp"

using namespace cfpp;

namespace {

// Constant-THW segment; ego speed varies a little so fluctuation metrics are
// well defined, LV trails ego speed by 0.5 m/s so DRAC is strictly positive.
CFSegment make_seg(double thw, int n) {
  CFSegment s;
  s.lv_length = 5.0;
  s.label = FvState::Neither;
  for (int i = 0; i < n; ++i) {
    const double ve = 10.0 + 0.2 * static_cast<double>(i % 5);
    s.ego_speed.push_back(ve);
    s.lv_speed.push_back(ve - 0.5);
    s.spacing.push_back(thw * ve);
    s.rel_speed.push_back(-0.5);
    s.ego_accel.push_back(0.0);
    s.fv_time_gap.push_back(2.0);
  }
  return s;
}

}  // namespace

TEST_CASE("fluctuation metrics on hand-computed series") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const FluctuationMetrics m = speed_fluctuation_metrics(v);
  CHECK(m.std == doctest::Approx(1.5811388300841898).epsilon(1e-12));
  CHECK(m.dmean == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(m.cv == doctest::Approx(52.704627669472995).epsilon(1e-12));

  // Geometric series: all log returns identical, so their spread is zero.
  CHECK(speed_fluctuation_metrics(std::vector<double>{1, 2, 4, 8}).vf == 0.0);

  // Returns are +-100 ln 2, sample sd = 100 ln 2 * sqrt(2).
  CHECK(speed_fluctuation_metrics(std::vector<double>{1, 2, 1}).vf ==
        doctest::Approx(98.025814346854721).epsilon(1e-12));
}

TEST_CASE("fluctuation metrics agree with literal summation") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(3 + rng.index(40));
    for (auto& x : v) x = rng.uniform(5.0, 35.0);
    const size_t n = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    double ad = 0.0;
    for (double x : v) {
      ss += (x - mean) * (x - mean);
      ad += std::fabs(x - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> r;
    for (size_t i = 1; i < n; ++i) r.push_back(std::log(v[i] / v[i - 1]) * 100.0);
    double rsum = 0.0;
    for (double x : r) rsum += x;
    const double rmean = rsum / static_cast<double>(r.size());
    double rss = 0.0;
    for (double x : r) rss += (x - rmean) * (x - rmean);
    const double vf = std::sqrt(rss / static_cast<double>(r.size() - 1));

    const FluctuationMetrics m = speed_fluctuation_metrics(v);
    CHECK(m.std == doctest::Approx(sd).epsilon(1e-12));
    CHECK(m.dmean == doctest::Approx(ad / static_cast<double>(n)).epsilon(1e-12));
    CHECK(m.cv == doctest::Approx(sd / std::fabs(mean) * 100.0).epsilon(1e-12));
    CHECK(m.vf == doctest::Approx(vf).epsilon(1e-12));
  }
}

TEST_CASE("scaling speeds scales std and dmean but leaves cv and vf unchanged") {
  Rng rng(43);
  std::vector<double> v(20);
  for (auto& x : v) x = rng.uniform(5.0, 30.0);
  std::vector<double> scaled = v;
  const double c = 3.5;
  for (auto& x : scaled) x *= c;
  const FluctuationMetrics a = speed_fluctuation_metrics(v);
  const FluctuationMetrics b = speed_fluctuation_metrics(scaled);
  CHECK(b.std == doctest::Approx(c * a.std).epsilon(1e-12));
  CHECK(b.dmean == doctest::Approx(c * a.dmean).epsilon(1e-12));
  CHECK(b.cv == doctest::Approx(a.cv).epsilon(1e-12));
  CHECK(b.vf == doctest::Approx(a.vf).epsilon(1e-10));
}

TEST_CASE("safety metrics: single-frame direct substitution") {
  CFSegment s;
  s.lv_length = 5.0;
  s.ego_speed = {20.0};
  s.lv_speed = {10.0};
  s.spacing = {100.0};
  const SafetyMetrics m = safety_metrics(s);
  CHECK(m.mean_thw == doctest::Approx(5.0));
  CHECK(m.mean_drac == doctest::Approx(100.0 / 190.0).epsilon(1e-12));
  CHECK(m.max_drac == m.mean_drac);
}

TEST_CASE("DRAC is zero when the ego is not closing") {
  CFSegment s;
  s.lv_length = 5.0;
  s.ego_speed = {15.0, 15.0};
  s.lv_speed = {15.0, 16.0};
  s.spacing = {40.0, 40.0};
  const SafetyMetrics m = safety_metrics(s);
  CHECK(m.mean_drac == 0.0);
  CHECK(m.max_drac == 0.0);
}

TEST_CASE("mean DRAC averages over all frames including zeros") {
  CFSegment s;
  s.lv_length = 5.0;
  s.ego_speed = {20.0, 20.0};
  s.lv_speed = {10.0, 25.0};  // second frame opens up: DRAC 0
  s.spacing = {100.0, 100.0};
  const SafetyMetrics m = safety_metrics(s);
  CHECK(m.mean_drac == doctest::Approx(0.5 * 100.0 / 190.0).epsilon(1e-12));
  CHECK(m.max_drac == doctest::Approx(100.0 / 190.0).epsilon(1e-12));
}

TEST_CASE("safety metric domain errors") {
  CFSegment empty;
  CHECK_THROWS_AS(safety_metrics(empty), DomainError);
  CFSegment closed;
  closed.lv_length = 5.0;
  closed.ego_speed = {10.0};
  closed.lv_speed = {10.0};
  closed.spacing = {4.0};  // bumper gap -1
  CHECK_THROWS_AS(safety_metrics(closed), DomainError);
}

TEST_CASE("paired t-test matches a literal computation") {
  Rng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 3 + rng.index(20);
    std::vector<double> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(0.0, 10.0);
      b[i] = rng.uniform(0.0, 10.0);
    }
    double md = 0.0;
    for (size_t i = 0; i < n; ++i) md += a[i] - b[i];
    md /= static_cast<double>(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = a[i] - b[i] - md;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const PairedTestResult r = paired_t_test(a, b);
    CHECK(r.df == static_cast<int>(n) - 1);
    CHECK(r.t_stat == doctest::Approx(md / (sd / std::sqrt(static_cast<double>(n)))).epsilon(1e-10));
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);

    const PairedTestResult swapped = paired_t_test(b, a);
    CHECK(swapped.t_stat == doctest::Approx(-r.t_stat).epsilon(1e-10));
    CHECK(swapped.p_value == doctest::Approx(r.p_value).epsilon(1e-10));
  }
}

TEST_CASE("paired t-test degenerate difference series") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  SUBCASE("identical series: no effect, p = 1") {
    const PairedTestResult r = paired_t_test(a, a);
    CHECK(!r.degenerate);
    CHECK(r.t_stat == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("constant nonzero shift: flagged, p = 0") {
    const std::vector<double> b{2.0, 3.0, 4.0};
    const PairedTestResult r = paired_t_test(b, a);
    CHECK(r.degenerate);
    CHECK(r.p_value == 0.0);
    CHECK(std::isinf(r.t_stat));
    CHECK(r.t_stat > 0.0);
  }
}

TEST_CASE("paired t-test input validation") {
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}),
                  DomainError);
}

TEST_CASE("comparison table on identical pools shows no effects") {
  std::vector<CFSegment> tail{make_seg(1.5, 50), make_seg(1.5, 50)};
  std::vector<CFSegment> gap = tail;
  std::vector<SegmentPair> pairs{{0, 0, {}}, {1, 1, {}}};
  const ComparisonTable table = build_comparison_table(pairs, tail, gap);
  REQUIRE(table.rows.size() == 6);
  for (const auto& row : table.rows) {
    CHECK(row.delta_pct == doctest::Approx(0.0));
    CHECK(row.p_value == 1.0);
    CHECK(!row.significant);
    CHECK(row.tailgated.mean == doctest::Approx(row.gapped.mean));
  }
  CHECK(table.rows[4].metric == "Mean THW");
  CHECK(table.rows[4].tailgated.mean == doctest::Approx(1.5));
}

TEST_CASE("comparison table picks up a THW gap between conditions") {
  std::vector<CFSegment> tail{make_seg(1.5, 50), make_seg(1.5, 50)};
  std::vector<CFSegment> gap{make_seg(3.0, 50), make_seg(3.0, 50)};
  std::vector<SegmentPair> pairs{{0, 0, {}}, {1, 1, {}}};
  const ComparisonTable table = build_comparison_table(pairs, tail, gap);
  const ComparisonRow& thw = table.rows[4];
  CHECK(thw.metric == "Mean THW");
  CHECK(thw.delta_pct == doctest::Approx(-50.0).epsilon(1e-12));
  // Both pairs shift by the same amount, so the test degenerates to p = 0.
  CHECK(thw.degenerate);
  CHECK(thw.p_value == 0.0);
  CHECK(thw.significant);
  // Speed profiles are identical across conditions: no fluctuation effect.
  CHECK(table.rows[0].metric == "V_sd");
  CHECK(table.rows[0].delta_pct == doctest::Approx(0.0));
  CHECK(table.rows[0].p_value == 1.0);
}

TEST_CASE("csv writer emits header comment and significance markers") {
  std::vector<CFSegment> tail{make_seg(1.5, 50), make_seg(1.5, 50)};
  std::vector<CFSegment> gap{make_seg(3.0, 50), make_seg(3.0, 50)};
  std::vector<SegmentPair> pairs{{0, 0, {}}, {1, 1, {}}};
  const ComparisonTable table = build_comparison_table(pairs, tail, gap);
  const std::string path = "/tmp/cfpp_metrics_table.csv";
  write_comparison_csv(table, path, "config_hash=abc seed=1");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# config_hash=abc seed=1");
  std::getline(in, line);
  CHECK(line.rfind("metric,", 0) == 0);
  bool saw_thw_star = false;
  while (std::getline(in, line)) {
    if (line.rfind("Mean THW,", 0) == 0) saw_thw_star = !line.empty() && line.back() == '*';
    if (line.rfind("V_sd,", 0) == 0) CHECK(line.back() != '*');
  }
  CHECK(saw_thw_star);
}
