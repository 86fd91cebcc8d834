#pragma once

#include <string>
#include <vector>

#include "mfnet/schema.hpp"

namespace mfnet {

struct OutputFile {
  std::string name;
  std::string content;
};

struct ExperimentResult {
  // Tables first, then manifest.json and resolved_config.json. Contents are
  // a pure function of the echoed configuration.
  std::vector<OutputFile> files;
  Json summary;
  // Measured by bench only; never written into files.
  double wall_seconds = 0.0;
};

// Runs a configuration that already went through resolve_config.
ExperimentResult run_experiment(const Json& resolved);

// Writes every file of `result` atomically into `directory` (created when missing).
void write_result(const ExperimentResult& result, const std::string& directory);

}  // namespace mfnet
