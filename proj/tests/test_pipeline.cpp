#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cfpp/config.hpp"
#include "cfpp/errors.hpp"
#include "cfpp/io.hpp"
#include "cfpp/pipeline.hpp"

using namespace cfpp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small-but-complete configuration: two fixture recordings, tiny networks,
// two training epochs. Everything a full pipeline run needs, in seconds.
std::string mini_config(const std::string& out_dir) {
  return "[run]\n"
         "seed = 5\n"
         "[io]\n"
         "out_dir = " +
         out_dir +
         "\n"
         "[fixtures]\n"
         "recordings = 1\n"
         "duration_s = 30\n"
         "[pair]\n"
         "max_normalized_distance = 10\n"
         "[train]\n"
         "epochs = 2\n"
         "transitions_per_epoch = 60\n"
         "hidden = 8\n"
         "disc_minibatch = 32\n"
         "minibatch = 32\n"
         "ppo_epochs = 2\n"
         "[reward_map]\n"
         "fixed_speeds = 11, 20\n";
}

}  // namespace

TEST_CASE("config parsing: sections, comments, overrides") {
  const KeyValueConfig kv = KeyValueConfig::from_string(
      "# top comment\n"
      "[run]\n"
      "seed = 9  # trailing comment\n"
      "[train]\n"
      "epochs = 12\n"
      "gamma = 0.5\n",
      "<test>");
  CHECK(kv.has("run.seed"));
  CHECK(kv.get_int("run.seed", 0) == 9);
  CHECK(kv.get_int("train.epochs", 0) == 12);
  CHECK(kv.get_real("train.gamma", 0.0) == 0.5);
  CHECK(kv.get_int("train.missing", 77) == 77);

  KeyValueConfig patched = kv;
  patched.override_entry("run.seed", "10");
  CHECK(patched.get_int("run.seed", 0) == 10);
  // Overrides change the canonical form, and with it the hash.
  CHECK(fnv1a_hex(patched.canonical()) != fnv1a_hex(kv.canonical()));
}

TEST_CASE("config parsing errors") {
  CHECK_THROWS_AS(KeyValueConfig::from_string("[broken\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::from_string("no equals sign\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::from_file("/nonexistent/cfpp.conf"), ConfigError);
  const KeyValueConfig kv =
      KeyValueConfig::from_string("[train]\nepochs = soon\ngamma = high\nflag = maybe\n", "<t>");
  CHECK_THROWS_AS(kv.get_int("train.epochs", 0), ConfigError);
  CHECK_THROWS_AS(kv.get_real("train.gamma", 0.0), ConfigError);
  CHECK_THROWS_AS(kv.get_bool("train.flag", false), ConfigError);
}

TEST_CASE("pipeline config requires a seed and fills defaults") {
  CHECK_THROWS_AS(PipelineConfig::from_config(KeyValueConfig::from_string("", "<t>")),
                  ConfigError);
  const PipelineConfig cfg =
      PipelineConfig::from_config(KeyValueConfig::from_string("[run]\nseed = 3\n", "<t>"));
  CHECK(cfg.seed == 3);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.input_dir == "out/fixtures");
  CHECK(cfg.airl.epochs == 1500);
  CHECK(cfg.fixed_speeds == std::vector<double>{4.3, 7.4, 11.0, 20.0});
  CHECK(cfg.airl.seed == cfg.seed);
  CHECK(cfg.airl.config_hash == cfg.config_hash);
  CHECK(!cfg.config_hash.empty());
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("grid export and load round trip, including invalid cells") {
  GridData g;
  g.row_centers = {1.0, 2.0};
  g.col_centers = {0.5, 1.5, 2.5};
  g.values = {1.25, 0.0, -3.5, 4.0, 5.0, 6.0};
  g.valid = {1, 0, 1, 1, 1, 1};
  const std::string path = "/tmp/cfpp_grid_rt.csv";
  export_grid(g, path, "config_hash=x seed=1");
  const GridData back = load_grid(path);
  CHECK(back.row_centers == g.row_centers);
  CHECK(back.col_centers == g.col_centers);
  CHECK(back.valid == g.valid);
  for (size_t r = 0; r < 2; ++r)
    for (size_t c = 0; c < 3; ++c)
      if (back.is_valid(r, c)) CHECK(back.at(r, c) == g.at(r, c));
}

TEST_CASE("histogram2d counts and clamps boundary values") {
  const std::vector<double> rows{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> cols{0.0, 1.0, 2.0, 3.0};
  const GridData h = histogram2d(rows, cols, 2, 2);
  REQUIRE(h.row_centers.size() == 2);
  REQUIRE(h.col_centers.size() == 2);
  // Points sit on the diagonal; the max value lands in the last bin.
  CHECK(h.at(0, 0) == 2.0);
  CHECK(h.at(1, 1) == 2.0);
  CHECK(h.at(0, 1) == 0.0);
  CHECK(h.at(1, 0) == 0.0);
  double total = 0.0;
  for (double v : h.values) total += v;
  CHECK(total == 4.0);
}

TEST_CASE("stage dependency errors fire in order") {
  const std::string out = "/tmp/cfpp_pipe_deps";
  fs::remove_all(out);
  const PipelineConfig cfg = PipelineConfig::from_config(
      KeyValueConfig::from_string("[run]\nseed = 1\n[io]\nout_dir = " + out + "\n", "<t>"));
  CHECK_THROWS_AS(stage_extract(cfg), StageDependencyError);
  CHECK_THROWS_AS(stage_pair(cfg), StageDependencyError);
  CHECK_THROWS_AS(stage_metrics(cfg), StageDependencyError);
  CHECK_THROWS_AS(stage_train(cfg), StageDependencyError);
  CHECK_THROWS_AS(stage_reward_map(cfg), StageDependencyError);
  CHECK_THROWS_AS(stage_density(cfg), StageDependencyError);
  CHECK_THROWS_AS(run_stage("fly", cfg), ConfigError);
}

TEST_CASE("full pipeline run produces every artifact and is reproducible") {
  const std::string out = "/tmp/cfpp_pipe_full";
  fs::remove_all(out);
  const PipelineConfig cfg =
      PipelineConfig::from_config(KeyValueConfig::from_string(mini_config(out), "<t>"));

  const std::vector<std::string> stages{"generate-fixtures", "extract", "pair",      "metrics",
                                        "train",             "reward-map", "density"};
  for (const auto& s : stages) run_stage(s, cfg);

  const std::vector<std::string> artifacts{
      out + "/segments.jsonl",
      out + "/pairs.jsonl",
      out + "/table.csv",
      out + "/table.json",
      out + "/models/tailgated/manifest.json",
      out + "/models/gapped/g.json",
      out + "/reports/train_tailgated.csv",
      out + "/reports/train_gapped.csv",
      out + "/grids/reward_tailgated_v11.csv",
      out + "/grids/reward_tailgated_v20.csv",
      out + "/grids/reward_gapped_v11.csv",
      out + "/grids/reward_gapped_v20.csv",
      out + "/density/density_tailgated_spacing.csv",
      out + "/density/density_gapped_rel_speed.csv",
      out + "/density/density_tailgated_ego_accel.csv",
  };
  std::map<std::string, std::string> first_run;
  for (const auto& path : artifacts) {
    INFO(path);
    REQUIRE(fs::exists(path));
    first_run[path] = slurp(path);
  }
  // The stamp on the segment file carries the config hash and seed.
  CHECK(first_run[out + "/segments.jsonl"].rfind("# config_hash=" + cfg.config_hash, 0) == 0);

  // Re-run everything in place: every artifact must come back byte-identical.
  for (const auto& s : stages) run_stage(s, cfg);
  for (const auto& path : artifacts) {
    INFO(path);
    CHECK(slurp(path) == first_run[path]);
  }

  // Training reports have one row per epoch plus comment and header lines.
  std::istringstream report(first_run[out + "/reports/train_tailgated.csv"]);
  int lines = 0;
  std::string line;
  while (std::getline(report, line)) ++lines;
  CHECK(lines == 2 + 2);
}

TEST_CASE("split_pools keeps file order within each condition") {
  std::vector<CFSegment> segments(4);
  segments[0].label = FvState::Gapped;
  segments[0].ego_id = 10;
  segments[1].label = FvState::Tailgated;
  segments[1].ego_id = 11;
  segments[2].label = FvState::Neither;
  segments[2].ego_id = 12;
  segments[3].label = FvState::Tailgated;
  segments[3].ego_id = 13;
  const auto [tail, gap] = split_pools(segments);
  REQUIRE(tail.size() == 2);
  REQUIRE(gap.size() == 1);
  CHECK(tail[0].ego_id == 11);
  CHECK(tail[1].ego_id == 13);
  CHECK(gap[0].ego_id == 10);
}
