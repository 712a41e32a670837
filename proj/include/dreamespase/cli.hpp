#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace dreamespase::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kValidation = 2, kNumerical = 3, kIo = 4 };

/// One fully resolved command: enough to reproduce a run exactly.
struct Invocation {
  std::string command;
  std::map<std::string, std::string> inputs;  // role -> path
  nlohmann::json config;                      // resolved, every default filled in
  int threads = 1;
  std::string out;
};

/// Output file name -> contents. Commands build everything in memory so a
/// failure never leaves partial results behind.
using Outputs = std::map<std::string, std::string>;

/// Parses and fills defaults for a command's raw config (seed override
/// applied when given). Throws ValidationError with field paths.
nlohmann::json resolve_config(const std::string& command, nlohmann::json raw, const std::uint64_t* seed_override);

/// Validates inputs and computes a command's outputs without touching disk
/// beyond reading inputs.
Outputs execute(const Invocation& invocation);

/// execute, then writes outputs and manifest.json into invocation.out.
/// Returns the manifest.
nlohmann::json run_and_write(const Invocation& invocation);

/// Rebuilds the invocation recorded in a manifest. Throws ValidationError if
/// an input no longer matches its recorded digest.
Invocation from_manifest(const nlohmann::json& manifest);

/// Entry point: returns the process exit code.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace dreamespase::cli
