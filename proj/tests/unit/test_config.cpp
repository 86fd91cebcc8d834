#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mfnet/config.hpp"
#include "mfnet/experiments.hpp"
#include "mfnet/io.hpp"

using namespace mfnet;
namespace fs = std::filesystem;

namespace {

Json resolved(const std::string& sub, const std::string& preset, std::initializer_list<const char*> sets = {}) {
  Json c = config_from_preset(sub, preset);
  for (const char* s : sets) apply_override(c, s);
  return resolve_config(c);
}

bool mentions(const ConfigError& e, const std::string& path) {
  for (const auto& i : e.issues())
    if (i.path.find(path) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("catalogues") {
  const auto presets = preset_names();
  CHECK(std::find(presets.begin(), presets.end(), "2d-canard") != presets.end());
  CHECK(std::find(presets.begin(), presets.end(), "3d-mmo") != presets.end());
  CHECK(subcommand_names().size() == 13);
  CHECK_THROWS_AS(preset_document("nope"), InvalidArgument);
  CHECK_THROWS_AS(config_from_preset("nope", "2d-canard"), InvalidArgument);
}

TEST_CASE("presets conform to the preset schema") {
  const SchemaValidator v("schema/preset.schema.json");
  for (const auto& name : preset_names()) {
    const auto issues = v.validate(preset_document(name));
    INFO(name, describe(issues));
    CHECK(issues.empty());
  }
}

TEST_CASE("defaults are filled") {
  const Json r = resolved("hopf-scan", "2d-canard");
  CHECK(r["schema_version"] == 1);
  CHECK(r["seed"] == 1);
  CHECK(r["experiment"]["parameter"] == "sigma1");
  CHECK(r["experiment"]["steps"] == 400);
  CHECK(r["network"]["record_every"] == 10);
  CHECK(r["network"]["sample_indices"] == Json::array());
  CHECK(r["model"]["populations"][0]["ou_relaxation_time"] == 1.0);
  const Json b = resolved("bench", "2d-canard");
  CHECK(b["experiment"]["size"] == 2000);
  CHECK(b["experiment"]["horizon"] == 1500.0);
  CHECK(b["experiment"]["dt"] == 0.01);
}

TEST_CASE("unknown keys are rejected") {
  Json c = config_from_preset("fixed-points", "2d-canard");
  c["surprise"] = 1;
  CHECK_THROWS_AS(resolve_config(c), ConfigError);
  c = config_from_preset("fixed-points", "2d-canard");
  c["experiment"]["steps"] = 3;  // belongs to hopf-scan
  CHECK_THROWS_AS(resolve_config(c), ConfigError);
  c = config_from_preset("fixed-points", "2d-canard");
  c["model"]["populations"][0]["colour"] = "red";
  CHECK_THROWS_AS(resolve_config(c), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "frobnicate=3"), InvalidArgument);
}

TEST_CASE("every required field is required") {
  const Json base = config_from_preset("simulate-network", "2d-canard");
  for (const char* field : {"size", "time_constant", "gain"}) {
    Json c = base;
    c["model"]["populations"][1].erase(field);
    try {
      resolve_config(c);
      FAIL("accepted a population without ", field);
    } catch (const ConfigError& e) {
      CHECK(mentions(e, "/model/populations/1"));
    }
  }
  for (const char* field : {"dt", "horizon"}) {
    Json c = base;
    c["network"].erase(field);
    CHECK_THROWS_AS(resolve_config(c), ConfigError);
  }
  for (const char* field : {"subcommand", "model", "network"}) {
    Json c = base;
    c.erase(field);
    CHECK_THROWS_AS(resolve_config(c), ConfigError);
  }
}

TEST_CASE("type and range violations report their paths") {
  Json c = config_from_preset("simulate-network", "2d-canard");
  c["network"]["dt"] = "small";
  c["model"]["populations"][0]["gain"] = -1.0;
  c["seed"] = -4;
  try {
    resolve_config(c);
    FAIL("accepted an invalid document");
  } catch (const ConfigError& e) {
    CHECK(e.issues().size() >= 3);
    CHECK(mentions(e, "/network/dt"));
    CHECK(mentions(e, "/model/populations/0/gain"));
    CHECK(mentions(e, "/seed"));
    CHECK(std::string(e.what()).find("/network/dt") != std::string::npos);
  }
}

TEST_CASE("structural checks beyond the schema") {
  Json c = config_from_preset("simulate-network", "2d-canard");
  c["model"]["coupling"][1] = Json::array({1.0});
  CHECK_THROWS_AS(resolve_config(c), InvalidArgument);
  c = config_from_preset("simulate-network", "2d-canard");
  apply_override(c, "N=5");
  apply_override(c, "sample_indices=[10]");
  CHECK_THROWS_AS(resolve_config(c), InvalidArgument);
  c = config_from_preset("simulate-network", "2d-canard");
  apply_override(c, "horizon=0.001");
  CHECK_THROWS_AS(resolve_config(c), InvalidArgument);
}

TEST_CASE("overrides") {
  const Json r = resolved("hopf-scan", "2d-canard",
                          {"N=500", "N2=300", "sigma1=1.2", "epsilon=0.01", "ze=-0.3", "J12=-5", "dt=0.001",
                           "seed=9", "steps=10", "experiment.upper=2", "tau_ou=0.5", "spread1=0.2"});
  const auto& pops = r["model"]["populations"];
  CHECK(pops[0]["size"] == 500);
  CHECK(pops[1]["size"] == 300);
  CHECK(pops[0]["noise_sd"] == 1.2);
  CHECK(pops[0]["time_constant"] == 0.01);
  CHECK(pops[0]["input"] == -0.3);
  CHECK(pops[1]["ou_relaxation_time"] == 0.5);
  CHECK(pops[0]["initial_spread"] == 0.2);
  CHECK(pops[1]["initial_spread"] == 0.1);
  CHECK(r["model"]["coupling"][0][1] == -5.0);
  CHECK(r["network"]["dt"] == 0.001);
  CHECK(r["seed"] == 9);
  CHECK(r["experiment"]["steps"] == 10);
  CHECK(r["experiment"]["upper"] == 2);

  const Json m = resolved("fixed-points", "3d-mmo", {"k=-1", "gamma=-0.5", "rate=2", "U0=0.3", "lambda2=0.5"});
  CHECK(m["model"]["adaptation"]["offset"] == -1.0);
  CHECK(m["model"]["adaptation"]["leak"] == -0.5);
  CHECK(m["model"]["adaptation"]["rate"] == 2.0);
  CHECK(m["model"]["adaptation"]["initial"] == 0.3);
  CHECK(m["model"]["populations"][1]["adaptation_weight"] == 0.5);

  Json c = config_from_preset("fixed-points", "2d-canard");
  CHECK_THROWS_AS(apply_override(c, "k=-1"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(c, "sigma=1"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(c, "sigma3=1"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(c, "no-equals-sign"), InvalidArgument);
}

TEST_CASE("resolved documents are fixed points of resolution") {
  for (const auto& sub : subcommand_names())
    for (const auto& preset : preset_names()) {
      const Json r = resolve_config(config_from_preset(sub, preset));
      const Json e = echo_config(r);
      CHECK(resolve_config(e) == r);
      CHECK(resolve_config(parse_json_text(e.dump(2), "echo")) == r);
    }
  Json c = config_from_preset("bench", "2d-canard");
  c["threads"] = 4;
  c["output_dir"] = "/tmp/x";
  const Json e = echo_config(resolve_config(c));
  CHECK(!e.contains("threads"));
  CHECK(!e.contains("output_dir"));
}

TEST_CASE("network configuration from a document") {
  const NetworkConfig n = network_config(resolved("simulate-network", "3d-mmo", {"seed=5"}));
  CHECK(n.populations.size() == 2);
  CHECK(n.populations[0].sigmoid.noise_sd == 2.0);
  CHECK(n.populations[0].adaptation_weight == 1.0);
  REQUIRE(n.adaptation);
  CHECK(n.adaptation->leak == -0.8);
  CHECK(n.seed == 5);
  CHECK(n.dt == 0.002);
}

TEST_CASE("json syntax errors carry a position") {
  try {
    parse_json_text("{\n  \"a\": 1,\n  \"b\": }", "cfg");
    FAIL("parsed invalid JSON");
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    CHECK(what.find("cfg") != std::string::npos);
    CHECK(what.find("line 3") != std::string::npos);
  }
}

TEST_CASE("shortest round-trip number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("csv tables") {
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"}).add_row({"say \"hi\"", "line\nbreak"});
  CHECK(t.row_count() == 2);
  CHECK(t.str() == "a,b\r\n1,\"x,y\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n");
  CHECK_THROWS_AS(t.add_row({"only one"}), InvalidArgument);
}

TEST_CASE("atomic writes") {
  const fs::path dir = fs::temp_directory_path() / "mfnet_test_config";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file_atomic((dir / "f.txt").string(), "one");
  write_file_atomic((dir / "f.txt").string(), "two");
  CHECK(slurp(dir / "f.txt") == "two");
  CHECK(!fs::exists(dir / "f.txt.tmp"));
  try {
    write_file_atomic((dir / "missing" / "f.txt").string(), "x");
    FAIL("wrote into a missing directory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  fs::remove_all(dir);
}

TEST_CASE("experiment outputs are deterministic and complete") {
  const Json r = resolved("simulate-meanfield", "2d-canard", {"horizon=5"});
  const ExperimentResult a = run_experiment(r);
  const ExperimentResult b = run_experiment(r);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK(a.files[i].content == b.files[i].content);
  }
  CHECK(a.files[a.files.size() - 2].name == "manifest.json");
  CHECK(a.files.back().name == "resolved_config.json");
  const Json manifest = Json::parse(a.files[a.files.size() - 2].content);
  CHECK(manifest["subcommand"] == "simulate-meanfield");
  CHECK(parse_json_text(a.files.back().content, "resolved") == echo_config(r));

  const fs::path dir = fs::temp_directory_path() / "mfnet_test_result" / "nested";
  fs::remove_all(dir.parent_path());
  write_result(a, dir.string());
  for (const auto& f : a.files) CHECK(slurp(dir / f.name) == f.content);
  fs::remove_all(dir.parent_path());
}
