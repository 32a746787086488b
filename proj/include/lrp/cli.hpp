#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrp/error.hpp"

namespace lrp::cli {

/// Parsed `key = value` file. Keys inside a `[section]` are stored as
/// "section.key"; keys before the first section have no prefix.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> values;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::string> experiment_names();

/// Keys accepted by an experiment (common keys included).
std::vector<std::string> allowed_keys(const std::string& experiment);

/// One CSV row: (estimator, parameters, value, stderr, replicates, seed).
struct Row {
  std::string estimator;
  std::string parameters;  // "k=v;k=v"
  double value = 0.0;
  double stderr = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

struct ExperimentOutput {
  std::string experiment;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<Row> rows;
  /// Extra artifacts written next to the CSV (file name -> contents).
  std::map<std::string, std::string> files;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  unsigned workers = 0;
};

/// Validates every key and parameter, then runs the named experiment.
ExperimentOutput run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

inline constexpr std::string_view kCsvHeader = "experiment,estimator,parameters,value,stderr,replicates,seed";

std::string to_csv(const ExperimentOutput& out);
std::string to_json(const ExperimentOutput& out);

/// Writes <experiment>.csv, <experiment>.json and any extra files into dir.
void write_outputs(const ExperimentOutput& out, const std::filesystem::path& dir);

/// 2 for configuration errors, 3 for everything raised by an estimator.
int exit_code(ErrorCode code);

}  // namespace lrp::cli
