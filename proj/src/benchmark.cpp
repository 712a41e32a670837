#include "dreamespase/benchmark.hpp"

#include "dreamespase/errors.hpp"
#include "dreamespase/lasso.hpp"
#include "dreamespase/parallel.hpp"

namespace dreamespase::sim {

Method parse_method(const std::string& name) {
  if (name == "dreamespase") return Method::dreamespase;
  if (name == "nsds") return Method::nsds;
  if (name == "analyst") return Method::analyst;
  throw ValidationError("methods: unknown method \"" + name + "\" (expected dreamespase, nsds or analyst)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::dreamespase:
      return "dreamespase";
    case Method::nsds:
      return "nsds";
    default:
      return "analyst";
  }
}

MethodResult evaluate_method(const SimulatedDataset& data, Method method, const BenchmarkConfig& config,
                             std::uint64_t seed) {
  MethodResult out;
  out.method = method;
  if (method == Method::analyst) {
    out.selection = analyst_model(data.biopsies, seed);
  } else {
    auto schedule = config.schedule;
    schedule.seed = seed;
    const auto variant = method == Method::nsds ? gibbs::Variant::nsds : gibbs::Variant::spatial;
    const auto samples = gibbs::run_chain(data.biopsies, config.prior, schedule, variant);
    const auto report = gibbs::summarize_selection(samples, config.threshold);
    out.selection = to_selection(report);
    out.has_geweke = report.has_geweke;
    out.geweke = report.geweke;
  }
  out.metrics = selection_metrics(data.truth, out.selection);

  const std::array<const std::vector<SizeClass>*, 2> sizes{&data.truth.fixed_size, &data.truth.random_size};
  const std::array<const std::vector<double>*, 2> scores{&out.selection.fixed_score, &out.selection.random_score};
  for (int k = 0; k < 2; ++k) {
    std::vector<bool> truth;
    for (auto s : *sizes[k]) truth.push_back(s != SizeClass::null_effect);
    const auto roc = roc_curve(*scores[k], truth);
    for (double f : config.auc_fprs) out.auc[k].push_back(auc_p_normalized(roc, f));
  }
  return out;
}

std::vector<ReplicateResult> run_benchmark(const BenchmarkConfig& config, int threads) {
  if (config.replicates < 1) throw ValidationError("replicates: must be at least 1");
  if (config.methods.empty()) throw ValidationError("methods: at least one method is required");
  config.setting.validate();
  config.schedule.validate();
  config.prior.validate();

  std::vector<ReplicateResult> results(config.replicates);
  parallel_for(results.size(), threads, [&](std::size_t r) {
    const std::string tag = "replicate/" + std::to_string(r);
    auto setting = config.setting;
    setting.seed = derive_seed(config.seed, tag + "/data");
    const auto data = simulate_dataset(setting);
    auto& out = results[r];
    out.replicate = static_cast<int>(r);
    out.calibration = data.calibration;
    out.truth = data.truth;
    for (auto m : config.methods) {
      out.methods.push_back(evaluate_method(data, m, config, derive_seed(config.seed, tag + "/" + to_string(m))));
    }
  });
  return results;
}

std::vector<MetricsTable> pool_metrics(const std::vector<ReplicateResult>& results, std::size_t methods) {
  std::vector<MetricsTable> pooled(methods);
  for (const auto& r : results) {
    for (std::size_t m = 0; m < methods && m < r.methods.size(); ++m) pooled[m].add(r.methods[m].metrics);
  }
  return pooled;
}

}  // namespace dreamespase::sim
