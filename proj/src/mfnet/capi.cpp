#include "mfnet/mfnet.h"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "mfnet/config.hpp"
#include "mfnet/experiments.hpp"
#include "mfnet/parallel.hpp"
#include "mfnet/resources.hpp"
#include "mfnet/sigmoid.hpp"

struct mfnet_config {
  mfnet::Json document;
  std::string resolved_text;
};

struct mfnet_result {
  mfnet::ExperimentResult result;
  std::string summary_text;
};

namespace {

thread_local std::string t_error;
thread_local double t_error_time = std::numeric_limits<double>::quiet_NaN();

mfnet_status fail(mfnet_status status, const std::string& message, double time = std::numeric_limits<double>::quiet_NaN()) {
  t_error = message;
  t_error_time = time;
  return status;
}

// Runs body, translating exceptions into status codes and the thread-local message.
template <class Body>
mfnet_status guarded(Body&& body) {
  t_error.clear();
  t_error_time = std::numeric_limits<double>::quiet_NaN();
  try {
    body();
    return MFNET_OK;
  } catch (const mfnet::IntegrationFault& e) {
    return fail(MFNET_INTEGRATION_FAULT, e.what(), e.time());
  } catch (const mfnet::StiffnessError& e) {
    return fail(MFNET_STIFFNESS, e.what(), e.time());
  } catch (const mfnet::Error& e) {
    return fail(static_cast<mfnet_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MFNET_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(MFNET_INTERNAL_ERROR, e.what());
  }
}

mfnet_status null_argument(const char* what) { return fail(MFNET_INVALID_ARGUMENT, std::string(what) + " is null"); }

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

}  // namespace

extern "C" {

const char* mfnet_version(void) { return "1.0.0"; }

const char* mfnet_status_name(mfnet_status status) {
  switch (status) {
    case MFNET_OK: return "ok";
    case MFNET_INVALID_ARGUMENT: return "invalid-argument";
    case MFNET_DOMAIN_ERROR: return "domain-error";
    case MFNET_INTEGRATION_FAULT: return "integration-fault";
    case MFNET_STIFFNESS: return "stiffness";
    case MFNET_BRANCH_LOST: return "branch-lost";
    case MFNET_NOT_APPLICABLE: return "not-applicable";
    case MFNET_BISTABLE_REGIME: return "bistable-regime";
    case MFNET_IO_ERROR: return "io-error";
    case MFNET_INTERNAL_ERROR: return "internal-error";
  }
  return "unknown";
}

const char* mfnet_last_error(void) { return t_error.c_str(); }

double mfnet_last_error_time(void) { return t_error_time; }

mfnet_status mfnet_set_threads(unsigned threads) {
  if (threads == 0) return fail(MFNET_INVALID_ARGUMENT, "thread count must be at least 1");
  return guarded([&] { mfnet::set_thread_count(threads); });
}

const char* mfnet_preset_names(void) {
  static const std::string names = join_lines(mfnet::preset_names());
  return names.c_str();
}

const char* mfnet_subcommand_names(void) {
  static const std::string names = join_lines(mfnet::subcommand_names());
  return names.c_str();
}

mfnet_status mfnet_resource(const char* path, const char** text) {
  if (!path) return null_argument("path");
  if (!text) return null_argument("text");
  return guarded([&] {
    for (const auto& r : mfnet::resources())
      if (std::string(path) == r.path) {
        *text = r.text;
        return;
      }
    throw mfnet::InvalidArgument(std::string("unknown resource '") + path + "'");
  });
}

mfnet_status mfnet_config_from_json(const char* json, mfnet_config** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    mfnet::Json doc = mfnet::parse_json_text(json, "config");
    if (!doc.is_object()) throw mfnet::InvalidArgument("config: top level must be a JSON object");
    *out = new mfnet_config{std::move(doc), {}};
  });
}

mfnet_status mfnet_config_from_preset(const char* subcommand, const char* preset, mfnet_config** out) {
  if (!subcommand) return null_argument("subcommand");
  if (!preset) return null_argument("preset");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new mfnet_config{mfnet::config_from_preset(subcommand, preset), {}}; });
}

void mfnet_config_free(mfnet_config* config) { delete config; }

mfnet_status mfnet_config_set(mfnet_config* config, const char* assignment) {
  if (!config) return null_argument("config");
  if (!assignment) return null_argument("assignment");
  return guarded([&] {
    mfnet::Json copy = config->document;
    mfnet::apply_override(copy, assignment);
    config->document = std::move(copy);
  });
}

mfnet_status mfnet_config_set_seed(mfnet_config* config, uint64_t seed) {
  if (!config) return null_argument("config");
  return guarded([&] { config->document["seed"] = seed; });
}

mfnet_status mfnet_config_set_subcommand(mfnet_config* config, const char* subcommand) {
  if (!config) return null_argument("config");
  if (!subcommand) return null_argument("subcommand");
  return guarded([&] { config->document["subcommand"] = subcommand; });
}

mfnet_status mfnet_config_resolved_json(mfnet_config* config, const char** json) {
  if (!config) return null_argument("config");
  if (!json) return null_argument("json");
  return guarded([&] {
    config->resolved_text = mfnet::echo_config(mfnet::resolve_config(config->document)).dump(2) + "\n";
    *json = config->resolved_text.c_str();
  });
}

mfnet_status mfnet_run(const mfnet_config* config, mfnet_result** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto* r = new mfnet_result{mfnet::run_experiment(mfnet::resolve_config(config->document)), {}};
    r->summary_text = r->result.summary.dump(2);
    *out = r;
  });
}

void mfnet_result_free(mfnet_result* result) { delete result; }

size_t mfnet_result_file_count(const mfnet_result* result) { return result ? result->result.files.size() : 0; }

const char* mfnet_result_file_name(const mfnet_result* result, size_t index) {
  if (!result || index >= result->result.files.size()) return nullptr;
  return result->result.files[index].name.c_str();
}

const char* mfnet_result_file_content(const mfnet_result* result, size_t index) {
  if (!result || index >= result->result.files.size()) return nullptr;
  return result->result.files[index].content.c_str();
}

const char* mfnet_result_summary_json(const mfnet_result* result) {
  return result ? result->summary_text.c_str() : nullptr;
}

double mfnet_result_wall_seconds(const mfnet_result* result) { return result ? result->result.wall_seconds : 0.0; }

mfnet_status mfnet_result_write(const mfnet_result* result, const char* directory) {
  if (!result) return null_argument("result");
  if (!directory) return null_argument("directory");
  return guarded([&] { mfnet::write_result(result->result, directory); });
}

mfnet_status mfnet_effective_gain(double x, double gain, double noise_sd, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    const mfnet::SigmoidSpec spec{gain, noise_sd};
    spec.validate();
    *out = mfnet::effective_gain(x, spec);
  });
}

mfnet_status mfnet_effective_gain_inverse(double y, double gain, double noise_sd, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    const mfnet::SigmoidSpec spec{gain, noise_sd};
    spec.validate();
    *out = mfnet::effective_gain_inverse(y, spec);
  });
}

}  // extern "C"
