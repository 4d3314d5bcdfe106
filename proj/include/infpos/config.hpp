#pragma once

#include <string>

#include "json.hpp"

#include "infpos/channel.hpp"
#include "infpos/dataset.hpp"
#include "infpos/scenario.hpp"
#include "infpos/train.hpp"

namespace infpos {

struct DatasetConfig {
  std::size_t record_count = 80000;
  std::uint64_t master_seed = 1;
  SplitSpec split;
  NormalizationSpec normalization;
};

struct ModelConfig {
  double width_multiplier = 1.0;
  std::uint64_t init_seed = 1;
};

struct EvalConfig {
  std::string report_csv = "report.csv";
  std::string summary_json = "summary.json";
};

struct RunConfig {
  ScenarioConfig scenario;
  ChannelParams channel;
  DatasetConfig dataset;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
};

// Strict JSON parsing: unknown keys are fatal, omitted keys take the defaults
// above, constraint violations name the offending field.
RunConfig parse_config_json(const nlohmann::json& j);
RunConfig parse_config(const std::string& path);

// Full config echo (all effective values) for report provenance.
nlohmann::json config_to_json(const RunConfig& c);

}  // namespace infpos
