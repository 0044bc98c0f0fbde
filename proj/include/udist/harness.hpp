#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace udist {

inline constexpr const char* kVersion = "1.0.0";

enum ExitStatus : int { kExitOk = 0, kExitError = 1, kExitVerdictFailed = 2 };

inline constexpr const char* kExperimentKinds[] = {"count", "sweep", "lemma1", "cantor", "alpha-verify",
                                                   "spectral", "incidence", "report"};

struct RunOptions {
  std::optional<std::string> outDir;        // overrides the config "output" field
  std::optional<std::uint64_t> seed;        // overrides the config "seed" field
  std::optional<std::string> kind;          // must match the config "kind" when both are given
  int threads = 0;                          // 0 keeps UDIST_THREADS or the runtime default
};

struct RunResult {
  int exitCode = kExitOk;
  std::string message;                      // verdict summary or error diagnostic
  std::string outDir;
  std::vector<std::string> artifacts;       // file names inside outDir, manifest last
};

// Parses, validates and executes one experiment. Writes the artifacts, the
// resolved config (config.json) and manifest.json into the output directory.
// Never throws: errors become exit status 1 with the diagnostic in `message`.
RunResult run_config(const std::string& path, const RunOptions& opts = {});
RunResult run_config_json(const nlohmann::ordered_json& config, const RunOptions& opts = {});

}  // namespace udist
