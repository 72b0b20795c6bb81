#pragma once

#include <span>
#include <string>
#include <vector>

#include "cfpp/dtw.hpp"
#include "cfpp/extraction.hpp"

namespace cfpp {

struct FluctuationMetrics {
  double std = 0.0;    // m/s, sample standard deviation of speed
  double dmean = 0.0;  // m/s, mean absolute deviation
  double cv = 0.0;     // percent
  double vf = 0.0;     // percent log-return volatility
};

struct SafetyMetrics {
  double mean_thw = 0.0;   // s
  double mean_drac = 0.0;  // m/s^2
  double max_drac = 0.0;   // m/s^2
};

struct PairedTestResult {
  double t_stat = 0.0;
  int df = 0;
  double p_value = 1.0;
  double mean_delta_pct = 0.0;  // (mean(a) - mean(b)) / mean(b) * 100
  bool degenerate = false;      // zero-variance difference series
};

FluctuationMetrics speed_fluctuation_metrics(std::span<const double> speeds);

SafetyMetrics safety_metrics(const CFSegment& segment);

// Two-tailed paired t-test of a against b (elementwise differences).
PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct PopulationStats {
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

struct ComparisonRow {
  std::string metric;
  PopulationStats tailgated;
  PopulationStats gapped;
  double delta_pct = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p < .05
  bool degenerate = false;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

// Per-pair metric populations compared across the two FV conditions; rows are
// V_sd, D_mean, C_v, V_f, Mean THW, Mean DRAC.
ComparisonTable build_comparison_table(const std::vector<SegmentPair>& pairs,
                                       const std::vector<CFSegment>& tailgated_pool,
                                       const std::vector<CFSegment>& gapped_pool);

void write_comparison_csv(const ComparisonTable& table, const std::string& path,
                          const std::string& header_comment);
void write_comparison_json(const ComparisonTable& table, const std::string& path);

}  // namespace cfpp
