#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "simbias/network.hpp"
#include "simbias/search.hpp"

namespace simbias::harness {

enum class ExperimentKind { Closest, Flips, GpCheck, GreedyVsExact, Kernel, Theory };
enum class NetSource { Random, Passthrough, WeightsFile };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

/// One experiment. Every field has a command-line flag and a key of the same
/// name (without the leading dashes) in config files.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Closest;
  std::vector<int> n_values;
  int trials = 200;
  std::uint64_t seed = 0;

  double sigma_w2 = 2.0;
  double sigma_b2 = 0.0;
  int layers = 2;
  /// Empty means `layers` hidden layers of width n.
  std::vector<int> widths;
  std::string activation = "relu";
  NetSource net = NetSource::Random;
  std::string weights;

  SearchMethod search = SearchMethod::Greedy;
  /// 0 means n.
  int max_steps = 0;
  int max_h = 0;
  std::int64_t budget = kDefaultExactBudget;

  /// gp-check overlaps; empty means the default list.
  std::vector<double> overlaps;

  /// theory inputs
  double z = 1.0;
  double a = 1.0;

  bool record_timing = false;
  /// Worker threads; 0 means one per hardware thread.
  int parallel = 1;
  std::string out_csv;
  std::string out_json;
  std::string plot_data;

  /// Throws ConfigError (CLI exit code 2) on invalid combinations.
  void validate() const;
  NetworkConfig network_for(int n) const;
  int resolved_parallelism() const;

  /// Everything that determines the CSV rows (not parallelism, outputs or timing flag).
  nlohmann::json identity() const;
  nlohmann::json to_json() const;
  /// FNV-1a of identity().dump().
  std::uint64_t hash() const;
};

/// "64,128,256", "8..14:2" (step 2) or "64..512:x2" (geometric); items may be mixed.
std::vector<int> parse_n_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

/// Sets the field named by a flag or config-file key (dashes or underscores).
void apply_setting(ExperimentConfig& config, std::string key, const std::string& value);

/// Plain-text config: one `key = value` per line, '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

}  // namespace simbias::harness
