#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "dreamespase/benchmark.hpp"
#include "dreamespase/gibbs.hpp"
#include "dreamespase/hsm.hpp"
#include "dreamespase/simulate.hpp"

namespace dreamespase::config {

using nlohmann::json;

/// Every parser below fills defaults for absent keys and rejects unknown
/// keys or wrongly typed values with a ValidationError naming the field path
/// (for example "config.prior.sigma2_spike").

struct FitConfig {
  gibbs::PriorConfig prior;
  gibbs::Schedule schedule;
  gibbs::Variant variant = gibbs::Variant::spatial;
  bool standardize = true;
  double threshold = 0.5;
};

FitConfig parse_fit(const json& j);
json to_json(const FitConfig& c);

struct HsmFitConfig {
  hsm::PartitionConfig partition;
};

HsmFitConfig parse_hsm_fit(const json& j);
json to_json(const HsmFitConfig& c);

/// The simulation setting: either a `ratio` preset (0.5, 0.75, 0.9) with
/// overrides, or explicit fields.
sim::SimSetting parse_setting(const json& j, const std::string& path = "config");
json to_json(const sim::SimSetting& s);

sim::BenchmarkConfig parse_benchmark(const json& j);
json to_json(const sim::BenchmarkConfig& c);

struct PreprocessConfig {
  double threshold = 0.8;
};

PreprocessConfig parse_preprocess(const json& j);
json to_json(const PreprocessConfig& c);

struct DiagnoseConfig {
  std::string column = "loglik";
  double first = 0.1;
  double last = 0.5;
};

DiagnoseConfig parse_diagnose(const json& j);
json to_json(const DiagnoseConfig& c);

/// Reads a JSON file; IoError if unreadable, ValidationError if malformed.
json read_json(const std::string& path);

}  // namespace dreamespase::config
