#include "cfpp/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "cfpp/errors.hpp"
#include "cfpp/stats.hpp"

namespace cfpp {

using nlohmann::json;

FluctuationMetrics speed_fluctuation_metrics(std::span<const double> speeds) {
  if (speeds.size() < 2) throw DomainError("speed_fluctuation_metrics: need at least 2 samples");
  for (double v : speeds)
    if (v <= 0.0) throw DomainError("speed_fluctuation_metrics: nonpositive speed");

  FluctuationMetrics m;
  const double mean = stats::mean(speeds);
  m.std = stats::sample_sd(speeds);
  m.dmean = stats::mean_abs_dev(speeds);
  m.cv = m.std / std::fabs(mean) * 100.0;

  std::vector<double> returns;
  returns.reserve(speeds.size() - 1);
  for (size_t i = 1; i < speeds.size(); ++i)
    returns.push_back(std::log(speeds[i] / speeds[i - 1]) * 100.0);
  m.vf = returns.size() >= 2 ? stats::sample_sd(returns) : 0.0;
  return m;
}

SafetyMetrics safety_metrics(const CFSegment& segment) {
  if (segment.length() == 0) throw DomainError("safety_metrics: empty segment series");
  SafetyMetrics m;
  double thw_sum = 0.0;
  double drac_sum = 0.0;
  for (size_t i = 0; i < segment.length(); ++i) {
    const double ve = segment.ego_speed[i];
    const double vl = segment.lv_speed[i];
    const double gap = segment.spacing[i];
    if (ve <= 0.0) throw DomainError("safety_metrics: nonpositive ego speed");
    const double bumper_gap = gap - segment.lv_length;
    if (bumper_gap <= 0.0) throw DomainError("safety_metrics: nonpositive bumper gap");
    thw_sum += gap / ve;
    const double drac = ve > vl ? (ve - vl) * (ve - vl) / (2.0 * bumper_gap) : 0.0;
    drac_sum += drac;
    m.max_drac = std::max(m.max_drac, drac);
  }
  m.mean_thw = thw_sum / static_cast<double>(segment.length());
  m.mean_drac = drac_sum / static_cast<double>(segment.length());
  return m;
}

PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("paired_t_test: length mismatch");
  const size_t n = a.size();
  if (n < 2) throw DomainError("paired_t_test: need at least 2 pairs");

  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double md = stats::mean(d);
  const double sd = stats::sample_sd(d);

  PairedTestResult r;
  r.df = static_cast<int>(n) - 1;
  const double mean_b = stats::mean(b);
  r.mean_delta_pct = (stats::mean(a) - mean_b) / mean_b * 100.0;
  if (sd == 0.0) {
    if (md == 0.0) {
      r.t_stat = 0.0;
      r.p_value = 1.0;
    } else {
      r.degenerate = true;
      r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), md);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_stat = md / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = stats::student_t_two_tailed_p(r.t_stat, r.df);
  return r;
}

namespace {

PopulationStats population_stats(std::span<const double> v) {
  PopulationStats s;
  s.max = -std::numeric_limits<double>::infinity();
  s.min = std::numeric_limits<double>::infinity();
  for (double x : v) {
    s.max = std::max(s.max, x);
    s.min = std::min(s.min, x);
  }
  s.mean = stats::mean(v);
  s.sd = v.size() >= 2 ? stats::sample_sd(v) : 0.0;
  return s;
}

}  // namespace

ComparisonTable build_comparison_table(const std::vector<SegmentPair>& pairs,
                                       const std::vector<CFSegment>& tailgated_pool,
                                       const std::vector<CFSegment>& gapped_pool) {
  if (pairs.empty()) throw DomainError("build_comparison_table: no pairs");

  struct MetricDef {
    std::string name;
    double (*eval)(const CFSegment&);
  };
  static const MetricDef kMetrics[] = {
      {"V_sd", [](const CFSegment& s) { return speed_fluctuation_metrics(s.ego_speed).std; }},
      {"D_mean", [](const CFSegment& s) { return speed_fluctuation_metrics(s.ego_speed).dmean; }},
      {"C_v", [](const CFSegment& s) { return speed_fluctuation_metrics(s.ego_speed).cv; }},
      {"V_f", [](const CFSegment& s) { return speed_fluctuation_metrics(s.ego_speed).vf; }},
      {"Mean THW", [](const CFSegment& s) { return safety_metrics(s).mean_thw; }},
      {"Mean DRAC", [](const CFSegment& s) { return safety_metrics(s).mean_drac; }},
  };

  ComparisonTable table;
  for (const auto& def : kMetrics) {
    std::vector<double> t_vals;
    std::vector<double> g_vals;
    t_vals.reserve(pairs.size());
    g_vals.reserve(pairs.size());
    for (const auto& p : pairs) {
      t_vals.push_back(def.eval(tailgated_pool[p.tailgated_index]));
      g_vals.push_back(def.eval(gapped_pool[p.gapped_index]));
    }
    ComparisonRow row;
    row.metric = def.name;
    row.tailgated = population_stats(t_vals);
    row.gapped = population_stats(g_vals);
    if (pairs.size() >= 2) {
      const PairedTestResult test = paired_t_test(t_vals, g_vals);
      row.p_value = test.p_value;
      row.degenerate = test.degenerate;
      row.delta_pct = test.mean_delta_pct;
    } else {
      row.delta_pct = (row.tailgated.mean - row.gapped.mean) / row.gapped.mean * 100.0;
    }
    row.significant = row.p_value < 0.05;
    table.rows.push_back(row);
  }
  return table;
}

void write_comparison_csv(const ComparisonTable& table, const std::string& path,
                          const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "metric,tailgated_max,tailgated_min,tailgated_mean,tailgated_sd,"
         "gapped_max,gapped_min,gapped_mean,gapped_sd,delta_pct,p_value,significant\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << ',';
  };
  for (const auto& r : table.rows) {
    out << r.metric << ',';
    put(r.tailgated.max);
    put(r.tailgated.min);
    put(r.tailgated.mean);
    put(r.tailgated.sd);
    put(r.gapped.max);
    put(r.gapped.min);
    put(r.gapped.mean);
    put(r.gapped.sd);
    put(r.delta_pct);
    put(r.p_value);
    out << (r.significant ? "*" : "") << '\n';
  }
}

void write_comparison_json(const ComparisonTable& table, const std::string& path) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    auto pop = [](const PopulationStats& s) {
      return json{{"max", s.max}, {"min", s.min}, {"mean", s.mean}, {"sd", s.sd}};
    };
    rows.push_back(json{{"metric", r.metric},
                        {"tailgated", pop(r.tailgated)},
                        {"gapped", pop(r.gapped)},
                        {"delta_pct", r.delta_pct},
                        {"p_value", r.p_value},
                        {"significant", r.significant},
                        {"degenerate", r.degenerate}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << json{{"rows", rows}}.dump(2) << '\n';
}

}  // namespace cfpp
