#pragma once

// Experiment runner behind the `paircrystal` executable: one command per
// invocation, tables + plots + a manifest written to the output directory.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "paircrystal/config.hpp"
#include "paircrystal/io.hpp"

namespace paircrystal::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode : int {
  kSuccess = 0,
  kIoError = 1,
  kConfigError = 2,
  kNumericalFailure = 3,
  kSearchFailure = 4,
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  io::TableFormat format = io::TableFormat::csv;
  bool plot = true;
  std::optional<unsigned> threads;  ///< overrides the config's "threads"
};

struct OutputFile {
  std::string name;  ///< file name inside out_dir
  std::string bytes;
};

struct RunResult {
  std::vector<OutputFile> files;  ///< tables and plots, in write order
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> warnings;
};

/// Runs the configured command in memory (nothing is written).
RunResult execute(const config::ExperimentConfig& cfg, const RunOptions& opt);

/// Manifest for a finished run: config hash, artifact version, per-output
/// FNV-1a checksums and sizes, command results and warnings. Contains no
/// wall-clock data, so identical configs give identical manifests.
nlohmann::json build_manifest(const config::ExperimentConfig& cfg, const RunOptions& opt, const RunResult& run);

/// execute + write every output and manifest.json into opt.out_dir.
nlohmann::json run_and_write(const config::ExperimentConfig& cfg, const RunOptions& opt);

/// Full command-line entry point; returns the process exit code.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace paircrystal::cli
