#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cfpp/config.hpp"

namespace cfpp {

// Filenames each stage reads/writes under the configured output directory.
struct StagePaths {
  std::string fixtures_dir;
  std::string segments;
  std::string pairs;
  std::string table_csv;
  std::string table_json;
  std::string models_dir;
  std::string reports_dir;
  std::string grids_dir;
  std::string density_dir;

  static StagePaths from_config(const PipelineConfig& cfg);
};

void stage_generate_fixtures(const PipelineConfig& cfg);
void stage_extract(const PipelineConfig& cfg);
void stage_pair(const PipelineConfig& cfg);
void stage_metrics(const PipelineConfig& cfg);
void stage_train(const PipelineConfig& cfg);
void stage_reward_map(const PipelineConfig& cfg);
void stage_density(const PipelineConfig& cfg);

// Dispatch by stage name; throws ConfigError for unknown commands.
void run_stage(const std::string& command, const PipelineConfig& cfg);

// Paired pools in file order (tailgated, gapped); shared by the stages that
// consume pair indices.
std::pair<std::vector<CFSegment>, std::vector<CFSegment>> split_pools(
    const std::vector<CFSegment>& segments);

}  // namespace cfpp
