#include "mfnet/config.hpp"

#include <algorithm>
#include <cctype>

#include "mfnet/resources.hpp"

namespace mfnet {

namespace {

constexpr const char* kExperimentSchema = "schema/experiment.schema.json";

const SchemaValidator& experiment_validator() {
  static const SchemaValidator v(kExperimentSchema);
  return v;
}

const Json& experiment_schema() {
  static const Json s = Json::parse(resource_text(kExperimentSchema));
  return s;
}

bool is_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return Json(text);
  }
}

Json& population(Json& config, std::size_t one_based, const std::string& key) {
  Json& pops = config.at("model").at("populations");
  if (one_based == 0 || one_based > pops.size())
    throw InvalidArgument("override '" + key + "': population index out of range (model has " +
                          std::to_string(pops.size()) + ")");
  return pops[one_based - 1];
}

// Population field shorthands; an empty index addresses every population when allowed.
struct Shorthand {
  const char* prefix;
  const char* field;
  bool all_when_unindexed;
};

constexpr Shorthand kShorthands[] = {
    {"tau_ou", "ou_relaxation_time", true}, {"spread", "initial_spread", true},
    {"lambda", "adaptation_weight", false}, {"sigma", "noise_sd", false},
    {"mean", "initial_mean", false},        {"tau", "time_constant", false},
    {"N", "size", true},                    {"I", "input", false},
    {"g", "gain", false},
};

bool apply_shorthand(Json& config, const std::string& key, const Json& value) {
  for (const auto& s : kShorthands) {
    const std::string prefix = s.prefix;
    if (key.rfind(prefix, 0) != 0) continue;
    const std::string rest = key.substr(prefix.size());
    if (rest.empty()) {
      if (!s.all_when_unindexed) throw InvalidArgument("override '" + key + "' needs a population index");
      for (auto& p : config.at("model").at("populations")) p[s.field] = value;
      return true;
    }
    if (!is_digits(rest)) continue;
    population(config, std::stoul(rest), key)[s.field] = value;
    return true;
  }
  return false;
}

void set_path(Json& config, const std::string& dotted, const Json& value) {
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string token = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (token.empty()) throw InvalidArgument("override path '" + dotted + "' has an empty component");
    Json* next;
    if (node->is_array()) {
      if (!is_digits(token) || std::stoul(token) >= node->size())
        throw InvalidArgument("override path '" + dotted + "': bad array index '" + token + "'");
      next = &(*node)[std::stoul(token)];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) throw InvalidArgument("override path '" + dotted + "' descends into a scalar");
      next = &(*node)[token];
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

}  // namespace

std::string resource_text(const std::string& path) {
  for (const auto& r : resources())
    if (path == r.path) return r.text;
  throw InvalidArgument("unknown resource '" + path + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& r : resources()) {
    const std::string p = r.path;
    if (p.rfind("presets/", 0) == 0 && p.size() > 13 && p.ends_with(".json"))
      names.push_back(p.substr(8, p.size() - 13));
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<std::string> subcommand_names() {
  std::vector<std::string> names;
  for (const auto& v : experiment_schema().at("properties").at("subcommand").at("enum"))
    names.push_back(v.get<std::string>());
  return names;
}

Json preset_document(const std::string& name) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown preset '" + name + "' (known: " + known + ")");
  }
  return Json::parse(resource_text("presets/" + name + ".json"));
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(source + ": " + e.what());
  }
}

Json config_from_preset(const std::string& subcommand, const std::string& preset) {
  const auto subs = subcommand_names();
  if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
    throw InvalidArgument("unknown subcommand '" + subcommand + "'");
  const Json doc = preset_document(preset);
  Json config = Json::object();
  config["subcommand"] = subcommand;
  config["preset"] = preset;
  config["model"] = doc.at("model");
  config["network"] = doc.at("network");
  return config;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const Json value = parse_value(assignment.substr(eq + 1));

  if (key.find('.') != std::string::npos) return set_path(config, key, value);
  if (key == "seed") {
    config["seed"] = value;
    return;
  }
  static const char* kNetworkKeys[] = {"dt", "horizon", "record_every", "sampled_neurons", "sample_indices",
                                       "full_recording"};
  for (const char* k : kNetworkKeys)
    if (key == k) {
      config["network"][key] = value;
      return;
    }
  if (!config.contains("model") || !config.at("model").contains("populations"))
    throw InvalidArgument("override '" + key + "' needs a model (give --preset or --config first)");
  if (key == "epsilon") return void(population(config, 1, key)["time_constant"] = value);
  if (key == "ze") return void(population(config, 1, key)["input"] = value);
  if (key == "k" || key == "gamma" || key == "rate" || key == "U0") {
    Json& model = config["model"];
    if (!model.contains("adaptation")) throw InvalidArgument("override '" + key + "': model has no adaptation block");
    const char* field = key == "k" ? "offset" : key == "gamma" ? "leak" : key == "rate" ? "rate" : "initial";
    model["adaptation"][field] = value;
    return;
  }
  if (key.size() == 3 && key[0] == 'J' && std::isdigit(static_cast<unsigned char>(key[1])) &&
      std::isdigit(static_cast<unsigned char>(key[2]))) {
    Json& coupling = config["model"]["coupling"];
    const std::size_t a = static_cast<std::size_t>(key[1] - '0'), b = static_cast<std::size_t>(key[2] - '0');
    if (a == 0 || b == 0 || a > coupling.size() || b > coupling[a - 1].size())
      throw InvalidArgument("override '" + key + "': coupling index out of range");
    coupling[a - 1][b - 1] = value;
    return;
  }
  if (apply_shorthand(config, key, value)) return;

  const std::string sub = config.value("subcommand", std::string());
  const Json& exps = experiment_schema().at("$defs").at("experiments");
  if (exps.contains(sub) && exps.at(sub).at("properties").contains(key)) {
    config["experiment"][key] = value;
    return;
  }
  throw InvalidArgument("unknown override key '" + key + "'");
}

Json resolve_config(const Json& config) {
  const SchemaValidator& v = experiment_validator();
  auto issues = v.validate(config);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  Json out = v.materialize(config);
  issues = v.validate(out);

  const Json& model = out.at("model");
  const std::size_t p = model.at("populations").size();
  if (model.at("coupling").size() != p)
    issues.push_back({"/model/coupling", "must have one row per population (" + std::to_string(p) + ")"});
  for (std::size_t r = 0; r < model.at("coupling").size(); ++r)
    if (model.at("coupling")[r].size() != p)
      issues.push_back({"/model/coupling/" + std::to_string(r), "must have " + std::to_string(p) + " entries"});
  if (!issues.empty()) throw ConfigError(std::move(issues));

  std::size_t neurons = 0;
  for (const auto& pop : model.at("populations")) neurons += pop.at("size").get<std::size_t>();
  const Json& indices = out.at("network").at("sample_indices");
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i].get<std::size_t>() >= neurons)
      issues.push_back({"/network/sample_indices/" + std::to_string(i),
                        "must be below the neuron count " + std::to_string(neurons)});
  const double dt = out.at("network").at("dt").get<double>();
  if (out.at("network").at("horizon").get<double>() < dt)
    issues.push_back({"/network/horizon", "must be at least dt"});
  if (!issues.empty()) throw ConfigError(std::move(issues));
  network_config(out).validate();
  return out;
}

Json echo_config(const Json& resolved) {
  Json out = resolved;
  out.erase("threads");
  out.erase("output_dir");
  return out;
}

NetworkConfig network_config(const Json& resolved) {
  NetworkConfig c;
  const Json& model = resolved.at("model");
  for (const auto& p : model.at("populations")) {
    PopulationSpec s;
    s.size = p.at("size").get<int>();
    s.time_constant = p.at("time_constant").get<double>();
    s.input = p.value("input", 0.0);
    s.sigmoid.gain = p.at("gain").get<double>();
    s.sigmoid.noise_sd = p.value("noise_sd", 0.0);
    s.ou_relaxation_time = p.value("ou_relaxation_time", 1.0);
    s.adaptation_weight = p.value("adaptation_weight", 0.0);
    s.initial_mean = p.value("initial_mean", 0.0);
    s.initial_spread = p.value("initial_spread", 0.0);
    c.populations.push_back(s);
  }
  for (const auto& row : model.at("coupling")) c.coupling.push_back(row.get<std::vector<double>>());
  if (model.contains("adaptation")) {
    const Json& a = model.at("adaptation");
    c.adaptation = AdaptationSpec{a.value("rate", 1.0), a.value("offset", 0.0), a.value("leak", 0.0),
                                  a.value("initial", 0.0)};
  }
  c.seed = resolved.value("seed", std::uint64_t{1});
  c.dt = resolved.at("network").at("dt").get<double>();
  c.horizon = resolved.at("network").at("horizon").get<double>();
  return c;
}

}  // namespace mfnet
