#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dreamespase/gibbs.hpp"
#include "dreamespase/metrics.hpp"
#include "dreamespase/simulate.hpp"

namespace dreamespase::sim {

enum class Method { dreamespase, nsds, analyst };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct BenchmarkConfig {
  SimSetting setting;  // its seed is replaced per replicate
  int replicates = 10;
  std::vector<Method> methods{Method::dreamespase, Method::nsds, Method::analyst};
  gibbs::Schedule schedule;  // its seed is replaced per replicate and method
  gibbs::PriorConfig prior;
  double threshold = 0.5;
  std::vector<double> auc_fprs{0.1, 0.2};
  std::uint64_t seed = 1;
};

struct MethodResult {
  Method method = Method::dreamespase;
  MetricsTable metrics;
  std::array<std::vector<double>, 2> auc;  // [kind][auc_fprs index], normalized
  Selection selection;
  bool has_geweke = false;
  gibbs::GewekeResult geweke;
};

struct ReplicateResult {
  int replicate = 0;
  Calibration calibration;
  GroundTruth truth;
  std::vector<MethodResult> methods;
};

/// Simulates every replicate and fits every method. Replicates run in
/// parallel; seeds depend only on (seed, replicate, method).
std::vector<ReplicateResult> run_benchmark(const BenchmarkConfig& config, int threads = 1);

/// Fits one method to one simulated dataset and scores it.
MethodResult evaluate_method(const SimulatedDataset& data, Method method, const BenchmarkConfig& config,
                             std::uint64_t seed);

/// Counts pooled over replicates, per method (in config order).
std::vector<MetricsTable> pool_metrics(const std::vector<ReplicateResult>& results, std::size_t methods);

}  // namespace dreamespase::sim
