#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cfpp/airl.hpp"
#include "cfpp/extraction.hpp"
#include "cfpp/fixtures.hpp"

namespace cfpp {

// Key-value-with-sections config file ("[section]" headers, "key = value"
// lines, '#' comments). Flag overrides are applied as "section.key=value"
// entries and win over the file.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text, const std::string& origin);

  void override_entry(const std::string& dotted_key, const std::string& value);

  bool has(const std::string& dotted_key) const;
  std::string get_string(const std::string& dotted_key, const std::string& fallback) const;
  double get_real(const std::string& dotted_key, double fallback) const;
  int get_int(const std::string& dotted_key, int fallback) const;
  bool get_bool(const std::string& dotted_key, bool fallback) const;
  std::vector<double> get_reals(const std::string& dotted_key,
                                const std::vector<double>& fallback) const;

  // Canonical serialization (sorted keys) used for the config hash.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> entries_;
  std::string origin_;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string input_dir;  // defaults to <out_dir>/fixtures

  int fixture_recordings = 2;
  FixtureConfig fixture;

  ExtractionCriteria criteria;
  double pairing_threshold = 1.0;

  AirlConfig airl;

  int reward_bins = 10;
  std::vector<double> fixed_speeds = {4.3, 7.4, 11.0, 20.0};
  double grid_dy_lo = 5.0, grid_dy_hi = 105.0;
  double grid_dv_lo = -10.0, grid_dv_hi = 10.0;

  int density_bins = 20;

  std::string config_hash;

  static PipelineConfig from_config(const KeyValueConfig& kv);
};

}  // namespace cfpp
