#include "cfpp/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "cfpp/airl.hpp"
#include "cfpp/dtw.hpp"
#include "cfpp/errors.hpp"
#include "cfpp/fixtures.hpp"
#include "cfpp/io.hpp"
#include "cfpp/metrics.hpp"

namespace cfpp {

namespace fs = std::filesystem;

StagePaths StagePaths::from_config(const PipelineConfig& cfg) {
  StagePaths p;
  p.fixtures_dir = cfg.input_dir;
  p.segments = cfg.out_dir + "/segments.jsonl";
  p.pairs = cfg.out_dir + "/pairs.jsonl";
  p.table_csv = cfg.out_dir + "/table.csv";
  p.table_json = cfg.out_dir + "/table.json";
  p.models_dir = cfg.out_dir + "/models";
  p.reports_dir = cfg.out_dir + "/reports";
  p.grids_dir = cfg.out_dir + "/grids";
  p.density_dir = cfg.out_dir + "/density";
  return p;
}

namespace {

std::string stamp(const PipelineConfig& cfg) {
  return "config_hash=" + cfg.config_hash + " seed=" + std::to_string(cfg.seed);
}

std::vector<std::string> recording_prefixes(const std::string& dir) {
  std::vector<std::string> prefixes;
  if (!fs::is_directory(dir)) return prefixes;
  const std::string suffix = "_recordingMeta.csv";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix))
      prefixes.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(prefixes.begin(), prefixes.end());
  return prefixes;
}

std::vector<CFSegment> require_segments(const StagePaths& paths, const std::string& stage) {
  if (!fs::exists(paths.segments))
    throw StageDependencyError(stage + " requires the extract stage output (" + paths.segments +
                               ")");
  return read_segments_jsonl(paths.segments);
}

std::vector<SegmentPair> require_pairs(const StagePaths& paths, const std::string& stage) {
  if (!fs::exists(paths.pairs))
    throw StageDependencyError(stage + " requires the pair stage output (" + paths.pairs + ")");
  return read_pairs_jsonl(paths.pairs);
}

std::string speed_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::pair<std::vector<CFSegment>, std::vector<CFSegment>> split_pools(
    const std::vector<CFSegment>& segments) {
  std::vector<CFSegment> tailgated;
  std::vector<CFSegment> gapped;
  for (const auto& s : segments) {
    if (s.label == FvState::Tailgated) tailgated.push_back(s);
    if (s.label == FvState::Gapped) gapped.push_back(s);
  }
  return {std::move(tailgated), std::move(gapped)};
}

void stage_generate_fixtures(const PipelineConfig& cfg) {
  const StagePaths paths = StagePaths::from_config(cfg);
  fs::create_directories(paths.fixtures_dir);
  for (int r = 0; r < cfg.fixture_recordings; ++r) {
    FixtureConfig fc = cfg.fixture;
    fc.seed = cfg.seed + static_cast<std::uint64_t>(r);
    fc.recording_id = r + 1;
    const RecordingBundle bundle = generate_fixture_recording(fc);
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "rec%02d", r + 1);
    write_fixture_recording(bundle, paths.fixtures_dir, prefix);
  }
}

void stage_extract(const PipelineConfig& cfg) {
  const StagePaths paths = StagePaths::from_config(cfg);
  const auto prefixes = recording_prefixes(paths.fixtures_dir);
  if (prefixes.empty())
    throw StageDependencyError("extract requires recordings in " + paths.fixtures_dir +
                               " (run generate-fixtures or point io.input_dir at data)");
  std::vector<CFSegment> all;
  for (const auto& prefix : prefixes) {
    const std::string base = paths.fixtures_dir + "/" + prefix;
    RecordingBundle bundle = load_recording(base + "_tracks.csv", base + "_tracksMeta.csv",
                                            base + "_recordingMeta.csv");
    bundle = normalize_direction(bundle);
    auto segments = detect_cf_segments(bundle, cfg.criteria);
    all.insert(all.end(), segments.begin(), segments.end());
  }
  std::sort(all.begin(), all.end(), [](const CFSegment& a, const CFSegment& b) {
    return std::tie(a.recording_id, a.ego_id, a.frame_lo) <
           std::tie(b.recording_id, b.ego_id, b.frame_lo);
  });
  fs::create_directories(cfg.out_dir);
  write_segments_jsonl(all, paths.segments, stamp(cfg));
}

void stage_pair(const PipelineConfig& cfg) {
  const StagePaths paths = StagePaths::from_config(cfg);
  const auto segments = require_segments(paths, "pair");
  const auto [tailgated, gapped] = split_pools(segments);
  const auto pairs = pair_segments(tailgated, gapped, cfg.pairing_threshold);
  write_pairs_jsonl(pairs, tailgated, gapped, paths.pairs, stamp(cfg));
}

void stage_metrics(const PipelineConfig& cfg) {
  const StagePaths paths = StagePaths::from_config(cfg);
  const auto segments = require_segments(paths, "metrics");
  const auto pairs = require_pairs(paths, "metrics");
  const auto [tailgated, gapped] = split_pools(segments);
  if (pairs.empty()) throw DomainError("metrics: no pairs to compare");
  const ComparisonTable table = build_comparison_table(pairs, tailgated, gapped);
  write_comparison_csv(table, paths.table_csv, stamp(cfg));
  write_comparison_json(table, paths.table_json);
}

void stage_train(const PipelineConfig& cfg) {
  const StagePaths paths = StagePaths::from_config(cfg);
  const auto segments = require_segments(paths, "train");
  const auto pairs = require_pairs(paths, "train");
  const auto [tailgated, gapped] = split_pools(segments);
  fs::create_directories(paths.models_dir);
  fs::create_directories(paths.reports_dir);

  struct Condition {
    const char* name;
    const std::vector<CFSegment>* pool;
    std::vector<size_t> indices;
  };
  Condition conditions[2] = {{"tailgated", &tailgated, {}}, {"gapped", &gapped, {}}};
  for (const auto& p : pairs) {
    conditions[0].indices.push_back(p.tailgated_index);
    conditions[1].indices.push_back(p.gapped_index);
  }
  for (auto& cond : conditions) {
    std::vector<CFSegment> experts;
    for (size_t idx : cond.indices) experts.push_back((*cond.pool)[idx]);
    if (experts.empty())
      throw DomainError(std::string("train: no paired segments for condition ") + cond.name);
    auto [model, report] = train_airl(experts, cfg.airl);
    save_reward_model(model, paths.models_dir + "/" + cond.name);
    write_train_report_csv(report, paths.reports_dir + "/train_" + cond.name + ".csv", stamp(cfg));
  }
}

void stage_reward_map(const PipelineConfig& cfg) {
  const StagePaths paths = StagePaths::from_config(cfg);
  fs::create_directories(paths.grids_dir);
  for (const char* cond : {"tailgated", "gapped"}) {
    const std::string model_dir = paths.models_dir + "/" + cond;
    if (!fs::exists(model_dir + "/manifest.json"))
      throw StageDependencyError("reward-map requires the train stage output (" + model_dir + ")");
    const RewardModel model = load_reward_model(model_dir);
    for (double v : cfg.fixed_speeds) {
      const RewardGrid rg = reward_grid(model, v, cfg.reward_bins, cfg.grid_dy_lo, cfg.grid_dy_hi,
                                        cfg.grid_dv_lo, cfg.grid_dv_hi);
      GridData grid;
      grid.row_centers = rg.dv_centers;
      grid.col_centers = rg.dy_centers;
      grid.values = rg.values;
      grid.valid = rg.valid;
      export_grid(grid,
                  paths.grids_dir + "/reward_" + cond + "_v" + speed_tag(v) + ".csv",
                  stamp(cfg) + " rows=dv_le_mps cols=dy_le_m v_l=" + speed_tag(v));
    }
  }
}

void stage_density(const PipelineConfig& cfg) {
  const StagePaths paths = StagePaths::from_config(cfg);
  const auto segments = require_segments(paths, "density");
  const auto pairs = require_pairs(paths, "density");
  const auto [tailgated, gapped] = split_pools(segments);
  fs::create_directories(paths.density_dir);

  struct Condition {
    const char* name;
    std::vector<const CFSegment*> members;
  };
  Condition conditions[2];
  conditions[0].name = "tailgated";
  conditions[1].name = "gapped";
  for (const auto& p : pairs) {
    conditions[0].members.push_back(&tailgated[p.tailgated_index]);
    conditions[1].members.push_back(&gapped[p.gapped_index]);
  }
  for (const auto& cond : conditions) {
    if (cond.members.empty()) throw DomainError("density: no paired segments");
    std::vector<double> lv_speed;
    std::vector<double> spacing;
    std::vector<double> accel;
    std::vector<double> rel_speed;
    for (const CFSegment* s : cond.members) {
      lv_speed.insert(lv_speed.end(), s->lv_speed.begin(), s->lv_speed.end());
      spacing.insert(spacing.end(), s->spacing.begin(), s->spacing.end());
      accel.insert(accel.end(), s->ego_accel.begin(), s->ego_accel.end());
      rel_speed.insert(rel_speed.end(), s->rel_speed.begin(), s->rel_speed.end());
    }
    struct Axis {
      const char* name;
      const std::vector<double>* values;
    };
    for (const Axis& axis : {Axis{"spacing", &spacing}, Axis{"ego_accel", &accel},
                             Axis{"rel_speed", &rel_speed}}) {
      const GridData grid =
          histogram2d(lv_speed, *axis.values, cfg.density_bins, cfg.density_bins);
      export_grid(grid,
                  paths.density_dir + "/density_" + cond.name + "_" + axis.name + ".csv",
                  stamp(cfg) + " rows=lv_speed_mps cols=" + axis.name + " cells=raw_counts");
    }
  }
}

void run_stage(const std::string& command, const PipelineConfig& cfg) {
  if (command == "generate-fixtures") return stage_generate_fixtures(cfg);
  if (command == "extract") return stage_extract(cfg);
  if (command == "pair") return stage_pair(cfg);
  if (command == "metrics") return stage_metrics(cfg);
  if (command == "train") return stage_train(cfg);
  if (command == "reward-map") return stage_reward_map(cfg);
  if (command == "density") return stage_density(cfg);
  throw ConfigError("unknown command: " + command);
}

}  // namespace cfpp
