#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mfnet/mfnet.h"

namespace {

// 0 success, 1 invalid input or refused experiment, 2 numerical fault.
int exit_code(mfnet_status s) {
  switch (s) {
    case MFNET_OK: return 0;
    case MFNET_INTEGRATION_FAULT:
    case MFNET_STIFFNESS:
    case MFNET_BRANCH_LOST:
    case MFNET_DOMAIN_ERROR:
    case MFNET_INTERNAL_ERROR: return 2;
    default: return 1;
  }
}

int report(mfnet_status s) {
  std::cerr << "error (" << mfnet_status_name(s) << "): " << mfnet_last_error() << "\n";
  const double t = mfnet_last_error_time();
  if (!std::isnan(t)) std::cerr << "failure time: " << t << "\n";
  return exit_code(s);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

// "a:b" or "a:b:c" -> JSON numbers; throws on malformed input.
std::vector<std::string> range_parts(const std::string& flag, const std::string& text, bool step_required) {
  auto parts = split(text, ':');
  if (parts.size() != 2 && parts.size() != 3) throw CLI::ValidationError(flag, "expected lower:upper[:step]");
  if (step_required && parts.size() != 3) throw CLI::ValidationError(flag, "expected lower:upper:step");
  for (const auto& p : parts) {
    char* end = nullptr;
    std::strtod(p.c_str(), &end);
    if (p.empty() || *end != '\0') throw CLI::ValidationError(flag, "'" + p + "' is not a number");
  }
  return parts;
}

std::string json_list(const std::string& text) { return "[" + text + "]"; }

struct Options {
  std::string subcommand;
  std::string preset;
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::string> experiment;  // key=value pairs derived from convenience flags
  long long seed = -1;
  unsigned threads = 0;
  std::string output;
  bool print_config = false;
  bool quiet = false;
};

std::string default_output(const std::string& subcommand) {
  const char* env = std::getenv("MFNET_OUTPUT_DIR");
  const std::string base = env && *env ? env : "mfnet-output";
  return base + "/" + subcommand;
}

int execute(const Options& o) {
  if (o.preset.empty() == o.config_file.empty()) {
    std::cerr << "error: give exactly one of --preset or --config\n";
    return 1;
  }
  mfnet_config* raw = nullptr;
  mfnet_status s;
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read " << o.config_file << "\n";
      return 1;
    }
    std::stringstream text;
    text << in.rdbuf();
    s = mfnet_config_from_json(text.str().c_str(), &raw);
    if (s == MFNET_OK) s = mfnet_config_set_subcommand(raw, o.subcommand.c_str());
  } else {
    s = mfnet_config_from_preset(o.subcommand.c_str(), o.preset.c_str(), &raw);
  }
  std::unique_ptr<mfnet_config, decltype(&mfnet_config_free)> config(raw, mfnet_config_free);
  if (s != MFNET_OK) return report(s);

  if (o.seed >= 0 && (s = mfnet_config_set_seed(config.get(), static_cast<uint64_t>(o.seed))) != MFNET_OK)
    return report(s);
  for (const auto& a : o.experiment)
    if ((s = mfnet_config_set(config.get(), ("experiment." + a).c_str())) != MFNET_OK) return report(s);
  for (const auto& a : o.sets)
    if ((s = mfnet_config_set(config.get(), a.c_str())) != MFNET_OK) return report(s);

  const char* resolved = nullptr;
  if ((s = mfnet_config_resolved_json(config.get(), &resolved)) != MFNET_OK) return report(s);
  if (o.print_config) {
    std::cout << resolved;
    return 0;
  }
  if (o.threads > 0 && (s = mfnet_set_threads(o.threads)) != MFNET_OK) return report(s);

  mfnet_result* rraw = nullptr;
  s = mfnet_run(config.get(), &rraw);
  std::unique_ptr<mfnet_result, decltype(&mfnet_result_free)> result(rraw, mfnet_result_free);
  if (s != MFNET_OK) return report(s);

  const std::string out = o.output.empty() ? default_output(o.subcommand) : o.output;
  if ((s = mfnet_result_write(result.get(), out.c_str())) != MFNET_OK) return report(s);
  if (!o.quiet) {
    std::cout << mfnet_result_summary_json(result.get()) << "\n";
    for (size_t i = 0; i < mfnet_result_file_count(result.get()); ++i)
      std::cout << "wrote " << out << "/" << mfnet_result_file_name(result.get(), i) << "\n";
  }
  if (o.subcommand == "bench") {
    std::printf("bench: wall time %.2f s (reference 66 s)\n", mfnet_result_wall_seconds(result.get()));
    if (mfnet_result_wall_seconds(result.get()) > 66.0) std::printf("bench: warning: slower than the reference\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic multi-population network simulator and mean-field analysis toolkit", "mfnet"};
  app.require_subcommand(0, 1);
  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "Print the embedded preset names");

  Options o;
  std::vector<CLI::App*> subs;
  for (const auto& name : split(mfnet_subcommand_names(), '\n')) {
    if (name.empty()) continue;
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--preset", o.preset, "Embedded preset name");
    sub->add_option("--config", o.config_file, "Experiment configuration file (JSON)");
    sub->add_option("--set", o.sets, "Override key=value (repeatable)")->allow_extra_args(false);
    sub->add_option("--seed", o.seed, "Master seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("-o,--output", o.output, "Output directory (default $MFNET_OUTPUT_DIR/<subcommand>)");
    sub->add_flag("--print-config", o.print_config, "Print the resolved configuration and exit");
    sub->add_flag("-q,--quiet", o.quiet, "Do not print the summary");
    subs.push_back(sub);
  }
  auto flag = [&](const std::string& sub, const std::string& name, const std::string& key, const std::string& help,
                  bool list = false) {
    app.get_subcommand(sub)
        ->add_option_function<std::string>(
            name, [&o, key, list](const std::string& v) { o.experiment.push_back(key + "=" + (list ? json_list(v) : v)); },
            help)
        ->allow_extra_args(false);
  };
  auto range = [&](const std::string& sub, const std::string& name, const std::string& lo, const std::string& hi,
                   const std::string& step, const std::string& help) {
    app.get_subcommand(sub)
        ->add_option_function<std::string>(
            name,
            [&o, name, lo, hi, step](const std::string& v) {
              const auto p = range_parts(name, v, false);
              o.experiment.push_back(lo + "=" + p[0]);
              o.experiment.push_back(hi + "=" + p[1]);
              if (p.size() == 3) o.experiment.push_back(step + "=" + p[2]);
            },
            help)
        ->allow_extra_args(false);
  };
  flag("hopf-scan", "--parameter", "parameter", "Continuation parameter (sigma1, ze, k, J12, ...)");
  range("hopf-scan", "--range", "lower", "upper", "steps", "lower:upper[:steps]");
  flag("amplitude-sweep", "--parameter", "parameter", "Swept parameter");
  range("amplitude-sweep", "--range", "lower", "upper", "step", "lower:upper[:step]");
  app.get_subcommand("amplitude-sweep")->add_flag_callback("--canard-window", [&o] { o.experiment.push_back("canard_window=true"); }, "Locate the amplitude jump");
  flag("regime-map", "--x", "x_parameter", "First grid parameter");
  range("regime-map", "--x-range", "x_lower", "x_upper", "x_step", "lower:upper[:step]");
  flag("regime-map", "--y", "y_parameter", "Optional second grid parameter");
  range("regime-map", "--y-range", "y_lower", "y_upper", "y_step", "lower:upper[:step]");
  range("fsn2-map", "--k-range", "k_lower", "k_upper", "k_step", "lower:upper[:step]");
  range("fsn2-map", "--sigma1-range", "sigma1_lower", "sigma1_upper", "sigma1_step", "lower:upper[:step]");
  flag("fsn2-map", "--hopf-epsilons", "hopf_epsilons", "Comma separated timescale ratios for the Hopf overlay", true);
  flag("mmo-classify", "--source", "source", "meanfield or network");
  flag("residence", "--parameter", "parameter", "Parameter varied across runs");
  flag("residence", "--values", "values", "Comma separated parameter values", true);
  flag("residence", "--seeds", "seeds", "Seeds per value");
  flag("residence", "--radius", "radius", "Ball radius around the fixed point (0 = automatic)");
  flag("early-jumps", "--transient", "transient", "Discarded initial time");
  flag("convergence", "--sizes", "sizes", "Comma separated population sizes", true);
  flag("convergence", "--seeds", "seeds", "Seeds per size");
  flag("bench", "--size", "size", "Neurons per population");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (list_presets) {
    std::cout << mfnet_preset_names();
    return 0;
  }
  for (CLI::App* sub : subs)
    if (sub->parsed()) {
      o.subcommand = sub->get_name();
      return execute(o);
    }
  std::cerr << app.help();
  return 1;
}
