#pragma once

#include <string>
#include <vector>

#include "mfnet/errors.hpp"
#include "mfnet/schema.hpp"
#include "mfnet/types.hpp"

namespace mfnet {

// Schema violation; what() lists one "path: message" line per issue.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<SchemaIssue> issues)
      : InvalidArgument("configuration rejected:\n" + describe(issues)), issues_(std::move(issues)) {}
  const std::vector<SchemaIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<SchemaIssue> issues_;
};

std::vector<std::string> preset_names();
std::vector<std::string> subcommand_names();

// Parsed preset document; throws InvalidArgument for an unknown name.
Json preset_document(const std::string& name);

// Parses JSON text; syntax errors become InvalidArgument with line and column.
Json parse_json_text(const std::string& text, const std::string& source);

// Minimal configuration: subcommand, preset name, model and network of the preset.
Json config_from_preset(const std::string& subcommand, const std::string& preset);

// Applies "key=value". Keys are model shorthands (N, N1, tau1, epsilon, ze,
// I1, g1, sigma1, lambda1, tau_ou, tau_ou1, mean1, spread, spread1, J12, k,
// gamma, rate, U0), network fields (dt, horizon, record_every,
// sampled_neurons, full_recording), seed, a dotted path such as
// experiment.lower, or a bare experiment key. Values are parsed as JSON and
// fall back to a string.
void apply_override(Json& config, const std::string& assignment);

// Validates against the experiment schema, fills every default and returns
// the canonical document. Throws ConfigError listing every violation.
Json resolve_config(const Json& config);

// Resolved document without execution settings (threads, output_dir).
Json echo_config(const Json& resolved);

NetworkConfig network_config(const Json& resolved);

}  // namespace mfnet
