#include "dreamespase/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "dreamespase/benchmark.hpp"
#include "dreamespase/config.hpp"
#include "dreamespase/errors.hpp"
#include "dreamespase/gibbs.hpp"
#include "dreamespase/hsm.hpp"
#include "dreamespase/io.hpp"
#include "dreamespase/preprocess.hpp"
#include "dreamespase/random.hpp"

namespace dreamespase::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using io::CsvWriter;
using io::format_number;

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

const std::string& input(const Invocation& inv, const std::string& role) {
  const auto it = inv.inputs.find(role);
  if (it == inv.inputs.end()) throw ValidationError("missing input --" + role);
  return it->second;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ---- hsm-fit ---------------------------------------------------------------

Outputs hsm_fit(const Invocation& inv) {
  const auto cfg = config::parse_hsm_fit(inv.config);
  const auto biopsies = io::read_cells(input(inv, "cells"));

  CsvWriter sub({"biopsy_id", "subregion_id", "theta_mean", "theta_sd", "n1", "n2"});
  CsvWriter adj({"biopsy_id", "node_a", "node_b"});
  CsvWriter dropped({"biopsy_id", "reason"});
  int fitted = 0;
  for (const auto& [id, pattern] : biopsies) {
    auto pc = cfg.partition;
    pc.mh.seed = derive_seed(cfg.partition.mh.seed, "hsm/" + id);
    hsm::PartitionResult result;
    try {
      result = hsm::partition_and_fit(pattern, pc, inv.threads);
    } catch (const ValidationError& e) {
      spdlog::warn("biopsy {} dropped: {}", id, e.what());
      dropped.row({id, e.what()});
      continue;
    }
    ++fitted;
    for (const auto& c : result.cells) {
      sub.row({id, num(c.subregion_id), num(c.theta_mean), num(c.theta_sd), num(c.n1), num(c.n2)});
    }
    for (const auto& e : result.adjacency.edges()) adj.row({id, num(e.a), num(e.b)});
  }
  if (fitted == 0) throw ValidationError("no biopsy produced any fitted sub-region");
  return {{"subregions.csv", sub.text()}, {"adjacency.csv", adj.text()}, {"dropped.csv", dropped.text()}};
}

// ---- fit -------------------------------------------------------------------

Outputs fit(const Invocation& inv) {
  const auto cfg = config::parse_fit(inv.config);
  const auto outcomes = io::read_outcomes(input(inv, "outcomes"));
  const auto adjacency = io::read_adjacency(input(inv, "adjacency"));
  const auto covariates = io::read_covariates(input(inv, "covariates"));
  const auto biopsies = io::assemble_biopsies(outcomes, adjacency, covariates);

  const auto samples = gibbs::run_chain(biopsies, cfg.prior, cfg.schedule, cfg.variant, cfg.standardize);
  auto report = gibbs::summarize_selection(samples, cfg.threshold);
  report.names = covariates.names;
  const auto& names = covariates.names;

  Outputs out;
  CsvWriter alpha({"draw_index", "name", "value"}), gamma({"draw_index", "name", "value"});
  CsvWriter psi2({"draw_index", "name", "value"}), d({"draw_index", "name", "value"});
  CsvWriter global({"draw_index", "name", "value"});
  for (int s = 0; s < samples.kept(); ++s) {
    const auto idx = num(s);
    for (int j = 0; j < samples.p; ++j) {
      alpha.row({idx, names[j], num(samples.alpha(s, j))});
      gamma.row({idx, names[j], num(samples.gamma(s, j))});
      psi2.row({idx, names[j], num(samples.psi2(s, j))});
      d.row({idx, names[j], num(samples.d(s, j))});
    }
    global.row({idx, "p_gamma", num(samples.p_gamma[s])});
    global.row({idx, "p_d", num(samples.p_d[s])});
    global.row({idx, "tau2", num(samples.tau2[s])});
    global.row({idx, "rho", num(samples.rho[s])});
    global.row({idx, "nu2", num(samples.nu2[s])});
    global.row({idx, "loglik", num(samples.loglik[s])});
  }
  CsvWriter trace({"iteration", "loglik"});
  for (std::size_t t = 0; t < samples.loglik_trace.size(); ++t) {
    trace.row({std::to_string(t + 1), num(samples.loglik_trace[t])});
  }
  CsvWriter delta({"biopsy_id", "node", "delta_mean"});
  for (std::size_t b = 0; b < biopsies.size(); ++b) {
    for (Eigen::Index i = 0; i < samples.delta_mean[b].size(); ++i) {
      delta.row({biopsies[b].id, std::to_string(i), num(samples.delta_mean[b](i))});
    }
  }

  json sel;
  sel["names"] = report.names;
  sel["fixed_probability"] = report.fixed_probability;
  sel["random_probability"] = report.random_probability;
  sel["alpha_mean"] = report.alpha_mean;
  sel["psi2_mean"] = report.psi2_mean;
  sel["fixed_selected"] = json::array();
  sel["random_selected"] = json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (report.fixed_selected[j]) sel["fixed_selected"].push_back(names[j]);
    if (report.random_selected[j]) sel["random_selected"].push_back(names[j]);
  }
  sel["threshold"] = report.threshold;
  sel["standardized"] = cfg.standardize;
  sel["x_center"] = vector_json(samples.x_center);
  sel["x_scale"] = vector_json(samples.x_scale);
  sel["kept_draws"] = samples.kept();
  sel["geweke"] = report.has_geweke ? json{{"z", report.geweke.z}, {"p", report.geweke.p}} : json(nullptr);

  out["posterior_alpha.csv"] = alpha.text();
  out["posterior_gamma.csv"] = gamma.text();
  out["posterior_psi2.csv"] = psi2.text();
  out["posterior_d.csv"] = d.text();
  out["posterior_global.csv"] = global.text();
  out["loglik_trace.csv"] = trace.text();
  out["delta_mean.csv"] = delta.text();
  out["selection.json"] = dump(sel);
  return out;
}

// ---- simulate --------------------------------------------------------------

std::vector<std::string> covariate_names(int p) {
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

json calibration_json(const sim::Calibration& c) {
  return {{"phi", c.phi},     {"rho", c.rho},           {"tau2", c.tau2},
          {"nu2", c.nu2},     {"var_y", c.var_y},       {"snr_fixed", c.snr_fixed},
          {"snr_random", c.snr_random}, {"redraws", c.redraws}};
}

Outputs simulate(const Invocation& inv) {
  const auto setting = config::parse_setting(inv.config);
  const auto data = sim::simulate_dataset(setting);
  const auto names = covariate_names(setting.p);

  CsvWriter outcomes({"biopsy_id", "node", "y"});
  CsvWriter adj({"biopsy_id", "node_a", "node_b"});
  std::vector<std::string> header{"biopsy_id"};
  header.insert(header.end(), names.begin(), names.end());
  CsvWriter cov(header);
  for (const auto& b : data.biopsies) {
    for (Eigen::Index i = 0; i < b.y.size(); ++i) outcomes.row({b.id, std::to_string(i), num(b.y(i))});
    for (const auto& e : b.adjacency.edges()) adj.row({b.id, num(e.a), num(e.b)});
    std::vector<std::string> row{b.id};
    for (Eigen::Index j = 0; j < b.x.size(); ++j) row.push_back(num(b.x(j)));
    cov.row(row);
  }

  json truth;
  truth["names"] = names;
  truth["alpha"] = vector_json(data.truth.alpha);
  truth["psi2"] = vector_json(data.truth.psi2);
  truth["fixed_size"] = json::array();
  truth["random_size"] = json::array();
  for (auto s : data.truth.fixed_size) truth["fixed_size"].push_back(sim::to_string(s));
  for (auto s : data.truth.random_size) truth["random_size"].push_back(sim::to_string(s));
  truth["calibration"] = calibration_json(data.calibration);

  return {{"outcomes.csv", outcomes.text()},
          {"adjacency.csv", adj.text()},
          {"covariates.csv", cov.text()},
          {"truth.json", dump(truth)}};
}

// ---- evaluate --------------------------------------------------------------

constexpr std::array<const char*, 2> kKinds{"fixed", "random"};
constexpr std::array<const char*, 3> kSizes{"small", "medium", "large"};

std::string fpr_label(double f) { return "auc_" + format_number(f); }

Outputs evaluate(const Invocation& inv) {
  const auto cfg = config::parse_benchmark(inv.config);
  const auto results = sim::run_benchmark(cfg, inv.threads);
  const auto pooled = sim::pool_metrics(results, cfg.methods.size());

  CsvWriter reps({"replicate", "method", "kind", "metric", "hits", "total", "value"});
  CsvWriter calib({"replicate", "phi", "rho", "tau2", "nu2", "var_y", "snr_fixed", "snr_random", "redraws"});
  CsvWriter scores({"replicate", "method", "kind", "covariate", "score", "selected", "truth"});
  CsvWriter geweke({"replicate", "method", "z", "p"});
  const auto names = covariate_names(cfg.setting.p);

  for (const auto& r : results) {
    const auto rep = num(r.replicate);
    const auto& c = r.calibration;
    calib.row({rep, num(c.phi), num(c.rho), num(c.tau2), num(c.nu2), num(c.var_y), num(c.snr_fixed),
               num(c.snr_random), num(c.redraws)});
    for (const auto& m : r.methods) {
      const auto method = sim::to_string(m.method);
      for (int k = 0; k < 2; ++k) {
        for (int s = 0; s < 3; ++s) {
          const auto& t = m.metrics.tpr[k][s];
          reps.row({rep, method, kKinds[k], std::string("tpr_") + kSizes[s], num(t.hits), num(t.total),
                    num(t.rate())});
        }
        const auto& f = m.metrics.fpr[k];
        reps.row({rep, method, kKinds[k], "fpr", num(f.hits), num(f.total), num(f.rate())});
        for (std::size_t a = 0; a < cfg.auc_fprs.size(); ++a) {
          reps.row({rep, method, kKinds[k], fpr_label(cfg.auc_fprs[a]), "", "", num(m.auc[k][a])});
        }
        const auto& score = k == 0 ? m.selection.fixed_score : m.selection.random_score;
        const auto& selected = k == 0 ? m.selection.fixed_selected : m.selection.random_selected;
        const auto& truth = k == 0 ? r.truth.fixed_size : r.truth.random_size;
        for (std::size_t j = 0; j < score.size(); ++j) {
          scores.row({rep, method, kKinds[k], names[j], num(score[j]), selected[j] ? "1" : "0",
                      sim::to_string(truth[j])});
        }
      }
      if (m.has_geweke) geweke.row({rep, method, num(m.geweke.z), num(m.geweke.p)});
    }
  }

  std::vector<std::string> header{"metric", "kind", "size"};
  for (auto m : cfg.methods) header.push_back(sim::to_string(m));
  CsvWriter agg(header);
  for (int k = 0; k < 2; ++k) {
    for (int s = 0; s < 3; ++s) {
      std::vector<std::string> row{"tpr", kKinds[k], kSizes[s]};
      for (const auto& t : pooled) row.push_back(num(t.tpr[k][s].rate()));
      agg.row(row);
    }
  }
  for (int k = 0; k < 2; ++k) {
    std::vector<std::string> row{"fpr", kKinds[k], "null"};
    for (const auto& t : pooled) row.push_back(num(t.fpr[k].rate()));
    agg.row(row);
  }
  for (std::size_t a = 0; a < cfg.auc_fprs.size(); ++a) {
    for (int k = 0; k < 2; ++k) {
      std::vector<std::string> row{fpr_label(cfg.auc_fprs[a]), kKinds[k], "all"};
      for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        double sum = 0.0;
        for (const auto& r : results) sum += r.methods[m].auc[k][a];
        row.push_back(num(sum / static_cast<double>(results.size())));
      }
      agg.row(row);
    }
  }

  return {{"aggregate.csv", agg.text()},
          {"replicates.csv", reps.text()},
          {"calibration.csv", calib.text()},
          {"scores.csv", scores.text()},
          {"geweke.csv", geweke.text()}};
}

// ---- preprocess ------------------------------------------------------------

Outputs preprocess(const Invocation& inv) {
  const auto cfg = config::parse_preprocess(inv.config);
  const auto expr = io::read_expression(input(inv, "expression"));
  const auto result = sim::preprocess_genes(expr.genes, expr.groups, expr.values, cfg.threshold);

  std::set<std::string> seen;
  std::vector<std::string> header{"biopsy_id"};
  json sets = json::array();
  for (const auto& s : result.sets) {
    if (!seen.insert(s.name).second) throw ValidationError("gene set name \"" + s.name + "\" is ambiguous");
    header.push_back(s.name);
    sets.push_back({{"name", s.name}, {"group", s.group}, {"genes", s.genes}});
  }
  CsvWriter cov(header);
  for (Eigen::Index i = 0; i < result.covariates.rows(); ++i) {
    std::vector<std::string> row{expr.samples[i]};
    for (Eigen::Index s = 0; s < result.covariates.cols(); ++s) row.push_back(num(result.covariates(i, s)));
    cov.row(row);
  }
  const json doc{{"threshold", cfg.threshold}, {"sets", sets}, {"excluded", result.excluded}};
  return {{"covariates.csv", cov.text()}, {"sets.json", dump(doc)}};
}

// ---- diagnose --------------------------------------------------------------

Outputs diagnose(const Invocation& inv) {
  const auto cfg = config::parse_diagnose(inv.config);
  const auto table = io::read_csv(input(inv, "trace"));
  const int col = table.require_column(cfg.column);
  std::vector<double> trace;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    trace.push_back(table.number(r, col));
    if (!std::isfinite(trace.back())) throw ValidationError(table.where(r) + ": non-finite trace value");
  }
  if (trace.size() < 100) {
    throw ValidationError(table.path + ": the diagnostic needs at least 100 values, found " +
                          std::to_string(trace.size()));
  }
  const auto g = gibbs::geweke_diagnostic(trace, cfg.first, cfg.last);
  const json doc{{"column", cfg.column}, {"n", trace.size()}, {"first", cfg.first},
                 {"last", cfg.last},     {"z", g.z},            {"p", g.p}};
  return {{"geweke.json", dump(doc)}};
}

const std::set<std::string> kCommands{"hsm-fit", "fit", "simulate", "evaluate", "preprocess", "diagnose"};

std::shared_ptr<spdlog::logger> stderr_logger() {
  static auto logger = spdlog::stderr_color_mt("dreamespase");
  return logger;
}

int report(const char* kind, const std::exception& e, int code) {
  spdlog::error("{}: {}", kind, e.what());
  return code;
}

}  // namespace

json resolve_config(const std::string& command, json raw, const std::uint64_t* seed_override) {
  if (raw.is_null()) raw = json::object();
  if (seed_override) {
    if (command == "preprocess" || command == "diagnose") {
      spdlog::warn("--seed has no effect on {}", command);
    } else {
      if (!raw.is_object()) throw ValidationError("config: expected a JSON object");
      raw["seed"] = *seed_override;
    }
  }
  if (command == "hsm-fit") return config::to_json(config::parse_hsm_fit(raw));
  if (command == "fit") return config::to_json(config::parse_fit(raw));
  if (command == "simulate") return config::to_json(config::parse_setting(raw));
  if (command == "evaluate") return config::to_json(config::parse_benchmark(raw));
  if (command == "preprocess") return config::to_json(config::parse_preprocess(raw));
  if (command == "diagnose") return config::to_json(config::parse_diagnose(raw));
  throw ValidationError("unknown command \"" + command + "\"");
}

Outputs execute(const Invocation& inv) {
  if (inv.threads < 1) throw ValidationError("--threads: must be at least 1");
  if (inv.command == "hsm-fit") return hsm_fit(inv);
  if (inv.command == "fit") return fit(inv);
  if (inv.command == "simulate") return simulate(inv);
  if (inv.command == "evaluate") return evaluate(inv);
  if (inv.command == "preprocess") return preprocess(inv);
  if (inv.command == "diagnose") return diagnose(inv);
  throw ValidationError("unknown command \"" + inv.command + "\"");
}

json run_and_write(const Invocation& inv) {
  if (inv.out.empty()) throw ValidationError("--out: an output directory is required");
  json inputs = json::object();
  for (const auto& [role, path] : inv.inputs) {
    inputs[role] = {{"path", fs::absolute(path).lexically_normal().string()}, {"sha256", io::sha256_file(path)}};
  }

  const auto start = std::chrono::steady_clock::now();
  const auto outputs = execute(inv);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::error_code ec;
  fs::create_directories(inv.out, ec);
  if (ec) throw IoError("cannot create output directory " + inv.out + ": " + ec.message());
  json digests = json::object();
  for (const auto& [name, text] : outputs) {
    io::write_text(fs::path(inv.out) / name, text);
    digests[name] = io::sha256_hex(text);
  }

  json manifest;
  manifest["command"] = inv.command;
  manifest["version"] = kVersion;
  manifest["config"] = inv.config;
  manifest["seed"] = inv.config.contains("seed") ? inv.config["seed"] : json(nullptr);
  manifest["threads"] = inv.threads;
  manifest["inputs"] = inputs;
  manifest["out"] = fs::absolute(inv.out).lexically_normal().string();
  manifest["outputs"] = digests;
  manifest["timings"] = {{"total_seconds", seconds}};
  io::write_text(fs::path(inv.out) / "manifest.json", dump(manifest));
  spdlog::info("{} finished in {:.1f} s; wrote {} files to {}", inv.command, seconds, outputs.size() + 1, inv.out);
  return manifest;
}

Invocation from_manifest(const json& manifest) {
  if (!manifest.is_object()) throw ValidationError("manifest: expected a JSON object");
  for (const char* key : {"command", "config", "inputs", "threads", "out"}) {
    if (!manifest.contains(key)) throw ValidationError(std::string("manifest.") + key + ": missing");
  }
  Invocation inv;
  try {
    inv.command = manifest.at("command").get<std::string>();
    inv.threads = manifest.at("threads").get<int>();
    inv.out = manifest.at("out").get<std::string>();
    if (!kCommands.count(inv.command)) throw ValidationError("manifest.command: unknown \"" + inv.command + "\"");
    if (manifest.value("version", std::string()) != kVersion) {
      spdlog::warn("manifest was written by version {}, replaying with {}", manifest.value("version", "?"),
                   kVersion);
    }
    for (const auto& [role, entry] : manifest.at("inputs").items()) {
      const auto path = entry.at("path").get<std::string>();
      const auto recorded = entry.at("sha256").get<std::string>();
      const auto actual = io::sha256_file(path);
      if (actual != recorded) {
        throw ValidationError("manifest.inputs." + role + ": " + path + " changed since the recorded run");
      }
      inv.inputs[role] = path;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  inv.config = resolve_config(inv.command, manifest.at("config"), nullptr);
  return inv;
}

int run(int argc, char** argv) {
  spdlog::set_default_logger(stderr_logger());

  CLI::App app{"Spatial variable selection for multi-region biopsies"};
  app.set_version_flag("--version", kVersion);
  std::string manifest_path, replay_out, log_level = "info";
  int replay_threads = 0;
  app.add_option("--from-manifest", manifest_path, "Replay the run recorded in a manifest.json");
  app.add_option("--out", replay_out, "Output directory for a replay (default: the recorded one)");
  app.add_option("--threads", replay_threads, "Worker threads for a replay (default: the recorded count)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");
  app.require_subcommand(0, 1);

  struct Command {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> inputs;
    std::string config;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
  };
  std::map<std::string, Command> commands;
  auto add = [&](const std::string& name, const std::string& help, const std::vector<std::string>& roles,
                 bool seeded) {
    auto& c = commands[name];
    c.app = app.add_subcommand(name, help);
    for (const auto& role : roles) c.app->add_option("--" + role, c.inputs[role], role + " CSV")->required();
    c.app->add_option("--config", c.config, "JSON configuration (defaults for absent keys)");
    if (seeded) c.app->add_option("--seed", c.seed, "Master seed (overrides the config)");
    c.app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    c.app->add_option("--out", c.out, "Output directory")->required();
  };
  add("hsm-fit", "Fit the hierarchical Strauss interaction per sub-region", {"cells"}, true);
  add("fit", "Run the spatial spike-and-slab sampler", {"outcomes", "adjacency", "covariates"}, true);
  add("simulate", "Simulate one dataset", {}, true);
  add("evaluate", "Run the selection benchmark", {}, true);
  add("preprocess", "Collapse correlated genes into covariates", {"expression"}, false);
  add("diagnose", "Convergence diagnostic for a trace", {"trace"}, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  const auto level = spdlog::level::from_str(log_level);
  if (level == spdlog::level::off && log_level != "off") {
    std::cerr << "--log-level: unknown level \"" << log_level << "\"\n";
    return kValidation;
  }
  spdlog::set_level(level);

  try {
    Invocation inv;
    if (!manifest_path.empty()) {
      if (!app.get_subcommands().empty()) throw ValidationError("--from-manifest cannot be combined with a command");
      const auto manifest = config::read_json(manifest_path);
      inv = from_manifest(manifest);
      if (!replay_out.empty()) inv.out = replay_out;
      if (replay_threads > 0) inv.threads = replay_threads;
      const auto written = run_and_write(inv);
      if (manifest.contains("outputs") && written.at("outputs") != manifest.at("outputs")) {
        spdlog::warn("replayed outputs differ from the recorded digests");
        return kFailure;
      }
      spdlog::info("replayed outputs match the recorded digests");
      return kOk;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return kValidation;
    }
    auto* sub = app.get_subcommands().front();
    auto& c = commands.at(sub->get_name());
    inv.command = sub->get_name();
    inv.inputs = c.inputs;
    inv.threads = c.threads;
    inv.out = c.out;
    const json raw = c.config.empty() ? json::object() : config::read_json(c.config);
    const bool seeded = sub->get_option_no_throw("--seed") && sub->count("--seed") > 0;
    inv.config = resolve_config(inv.command, raw, seeded ? &c.seed : nullptr);
    run_and_write(inv);
    return kOk;
  } catch (const ValidationError& e) {
    return report("invalid input", e, kValidation);
  } catch (const NumericalError& e) {
    return report("numerical failure", e, kNumerical);
  } catch (const DomainError& e) {
    return report("numerical failure", e, kNumerical);
  } catch (const IoError& e) {
    return report("I/O error", e, kIo);
  } catch (const std::exception& e) {
    return report("error", e, kFailure);
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> copy{"dreamespase"};
  copy.insert(copy.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data());
}

}  // namespace dreamespase::cli
