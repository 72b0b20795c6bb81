#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfpp/config.hpp"
#include "cfpp/errors.hpp"
#include "cfpp/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kStageDependencyError = 3;
constexpr int kDataIntegrityError = 4;
constexpr int kTrainingDivergence = 5;

int run(const std::string& command, const std::string& config_path, long long seed_override,
        const std::string& out_override, const std::string& fixed_speeds_override) {
  cfpp::KeyValueConfig kv = cfpp::KeyValueConfig::from_file(config_path);
  if (seed_override >= 0) kv.override_entry("run.seed", std::to_string(seed_override));
  if (!out_override.empty()) kv.override_entry("io.out_dir", out_override);
  if (!fixed_speeds_override.empty())
    kv.override_entry("reward_map.fixed_speeds", fixed_speeds_override);
  const cfpp::PipelineConfig cfg = cfpp::PipelineConfig::from_config(kv);
  cfpp::run_stage(command, cfg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"car-following pipeline: extraction, pairing, metrics, AIRL training, exports"};
  app.require_subcommand(1);

  std::string config_path;
  long long seed_override = -1;
  std::string out_override;
  std::string fixed_speeds_override;

  const std::vector<std::string> commands = {"generate-fixtures", "extract", "pair", "metrics",
                                             "train", "reward-map", "density"};
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "pipeline config file")->required();
    sub->add_option("--seed", seed_override, "override run.seed");
    sub->add_option("--out", out_override, "override io.out_dir");
    if (name == "reward-map")
      sub->add_option("--fixed-speeds", fixed_speeds_override,
                      "comma-separated LV speeds, e.g. 4.3,7.4,11,20");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, config_path, seed_override, out_override, fixed_speeds_override);
  } catch (const cfpp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const cfpp::StageDependencyError& e) {
    std::fprintf(stderr, "stage dependency error: %s\n", e.what());
    return kStageDependencyError;
  } catch (const cfpp::TrainingDivergence& e) {
    std::fprintf(stderr, "training divergence: %s\n", e.what());
    return kTrainingDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDataIntegrityError;
  }
}
