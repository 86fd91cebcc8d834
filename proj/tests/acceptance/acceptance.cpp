// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// when any hard criterion fails. Arguments select a subset by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfnet/analysis.hpp"
#include "mfnet/bifurcation.hpp"
#include "mfnet/config.hpp"
#include "mfnet/experiments.hpp"
#include "mfnet/io.hpp"
#include "mfnet/network.hpp"
#include "mfnet/parallel.hpp"
#include "mfnet/sigmoid.hpp"
#include "mfnet/slowfast.hpp"

using namespace mfnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool soft = false;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string list(const std::vector<double>& v, const char* f = "%.4g") {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(f, v[i]);
  return s + "]";
}

Json config(const std::string& sub, const std::string& preset, const std::vector<std::string>& sets) {
  Json c = config_from_preset(sub, preset);
  for (const auto& s : sets) apply_override(c, s);
  return resolve_config(c);
}

// Number of adjacent pairs that break a non-strict monotone trend.
int inversions(const std::vector<double>& v, bool increasing) {
  int n = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (increasing ? v[i + 1] < v[i] : v[i + 1] > v[i]) ++n;
  return n;
}

Outcome sigmoid_closed_form() {
  int checked = 0, failed = 0;
  double worst = 0.0;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
    for (double g : {0.5, 1.0, 2.0, 4.0, 8.0})
      for (double s : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const SigmoidSpec spec{g, s};
        const auto mc = mc_effective_gain(x, spec, 1'000'000, 20260101);
        const double diff = std::fabs(mc.estimate - effective_gain(x, spec));
        const bool ok = s == 0.0 ? diff == 0.0 : diff <= 3.0 * mc.standard_error;
        if (!ok) ++failed;
        if (s > 0.0) worst = std::max(worst, diff / mc.standard_error);
        ++checked;
      }
  return {failed == 0, fmt("%d/%d grid points within 3 SE, worst %.2f SE", checked - failed, checked, worst)};
}

Outcome convergence_rate() {
  const Json r = config("convergence", "2d-canard",
                        {"sigma1=0.8", "horizon=20", "dt=0.001", "sizes=[100,400,1600,6400]", "seeds=10"});
  const ExperimentResult res = run_experiment(r);
  const Json& s = res.summary;
  if (s["fit_skipped"].get<bool>()) return {false, "fit skipped"};
  const double slope = s["slope"].get<double>();
  return {std::fabs(slope + 0.5) <= 0.15,
          fmt("slope %.3f +- %.3f, errors %s", slope, s["slope_stderr"].get<double>(),
              list(s["errors"].get<std::vector<double>>()).c_str())};
}

Outcome propagation_of_chaos() {
  NetworkConfig base = network_config(config("simulate-network", "2d-canard",
                                             {"sigma1=1.0", "tau_ou=0.01", "dt=0.01", "horizon=1000"}));
  RecordingPlan plan;
  plan.record_every = 5;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < 20; ++i) {
    plan.sample_indices.push_back(2 * i);
    plan.sample_indices.push_back(2 * i + 1);
    pairs.push_back({2 * i, 2 * i + 1});
  }
  std::vector<double> means;
  for (int n : {100, 400, 1600}) {
    double acc = 0.0;
    int count = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      NetworkConfig c = base;
      for (auto& p : c.populations) p.size = n;
      c.seed = seed;
      for (double v : pairwise_correlation(simulate_network(c, plan), pairs)) acc += std::fabs(v), ++count;
    }
    means.push_back(acc / count);
  }
  return {inversions(means, false) <= 1 && means.back() < means.front(),
          fmt("mean |corr| over N = 100, 400, 1600: %s", list(means).c_str())};
}

Outcome canard_explosion() {
  const MeanFieldModel base = meanfield_of(network_config(config("amplitude-sweep", "2d-canard", {})));
  std::vector<double> widths, ratios;
  for (double eps : {0.05, 0.01}) {
    const MeanFieldModel m = with_parameter(base, "epsilon", eps);
    const auto hopf = hopf_locus_1d(m, "ze", -1.0, 1.0);
    if (hopf.empty()) return {false, fmt("no Hopf point in ze at epsilon %.3g", eps)};
    const double c = hopf.back().parameter_value;
    CanardWindowOptions o;
    o.sweep.measure.transient = 100;
    o.sweep.measure.measure_horizon = 40;
    const CanardWindow w = canard_window(m, "ze", c - 0.1, c + 0.1, 0.002, o);
    widths.push_back(w.window.interval_upper - w.window.interval_lower);
    ratios.push_back(w.jump_ratio);
  }
  const bool ok = ratios[0] >= 10.0 && ratios[1] >= 10.0 && widths[1] < widths[0];
  return {ok, fmt("jump ratios %s, widths at epsilon 0.05, 0.01: %s", list(ratios).c_str(), list(widths).c_str())};
}

Outcome noise_induced_transition() {
  const ExperimentResult h =
      run_experiment(config("hopf-scan", "2d-canard", {"experiment.lower=0.9", "experiment.upper=2", "steps=110"}));
  const auto hopf = h.summary["hopf_values"].get<std::vector<double>>();
  const ExperimentResult r = run_experiment(
      config("regime-map", "2d-canard", {"x_lower=1.0", "x_upper=1.5", "x_step=0.02"}));
  std::vector<int> order;
  std::string bands;
  std::istringstream rows(r.files.front().content);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    std::string sx, regime;
    std::istringstream cells(line);
    std::getline(cells, sx, ',');
    std::getline(cells, regime, ',');
    const int k = regime == "stationary" ? 0 : regime == "bistable" ? 1 : 2;
    if (order.empty() || order.back() != k) {
      order.push_back(k);
      bands += (bands.empty() ? "" : " -> ") + regime + "@" + sx;
    }
  }
  const bool ok = !hopf.empty() && order == std::vector<int>{0, 1, 2};
  return {ok, fmt("Hopf at sigma1 %s; bands %s", list(hopf).c_str(), bands.c_str())};
}

Outcome fsn2_proximity() {
  const MeanFieldModel m = meanfield_of(network_config(config("fsn2-map", "3d-mmo", {})));
  const Fsn2Curve curve = fsn2_locus(m, -3.0, -0.8, {2.0});
  if (curve.points.empty()) return {false, "no FSN II point at sigma1 = 2"};
  double worst_residual = 0.0;
  for (const auto& p : curve.points)
    worst_residual = std::max({worst_residual, p.fold_residual, p.flow_residual, p.equilibrium_residual});
  std::vector<double> distance;
  for (double eps : {0.05, 0.005}) {
    const auto hopf = hopf_locus_1d(with_parameter(m, "epsilon", eps), "k", -3.0, -0.8);
    if (hopf.empty()) return {false, fmt("no Hopf point in k at epsilon %.3g", eps)};
    double worst = 0.0;
    for (const auto& f : curve.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : hopf) best = std::min(best, std::fabs(p.parameter_value - f.k));
      worst = std::max(worst, best);
    }
    distance.push_back(worst);
  }
  const bool ok = worst_residual < 1e-8 && distance[1] < distance[0];
  return {ok, fmt("FSN II at k %.5f, residual %.1e; Hopf distance at epsilon 0.05, 0.005: %s", curve.points[0].k,
                  worst_residual, list(distance).c_str())};
}

double mmo_wave(double t, int smalls) {
  const double phase = std::fmod(t, 1.0 + smalls);
  return (phase < 1.0 ? 1.0 : 0.1) * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
}

Outcome mmo_detection() {
  const ExperimentResult r = run_experiment(config("mmo-classify", "3d-mmo", {}));
  const std::string sig = r.summary["signature"].get<std::string>();
  const std::string blocks_csv = r.files[1].content;
  bool large_and_small = false;
  std::istringstream rows(blocks_csv);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    int block = 0, large = 0, small = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d", &block, &large, &small) == 3 && large > 0 && small > 0)
      large_and_small = true;
  }
  std::vector<double> t, v;
  for (double x = 0.0; x <= 40.0; x += 0.001) t.push_back(x), v.push_back(mmo_wave(x, 3));
  const std::string fixture = classify_mmo(t, v).notation();
  return {!sig.empty() && large_and_small && fixture == "1^3",
          fmt("preset attractor %s, synthetic fixture %s", sig.c_str(), fixture.c_str())};
}

Outcome early_jumps() {
  std::vector<double> median;
  std::vector<double> epochs;
  for (int n : {2000, 10000}) {
    const ExperimentResult r =
        run_experiment(config("early-jumps", "3d-mmo", {"N=" + std::to_string(n), "horizon=100", "seed=1"}));
    median.push_back(r.summary["median_lead"].get<double>());
    epochs.push_back(r.summary["epochs"].get<double>());
  }
  const bool ok = median[0] > 0.0 && epochs[0] >= 10 && epochs[1] >= 10 && median[1] < median[0];
  return {ok, fmt("median lead at N = 2000, 10000: %s over %s epochs", list(median).c_str(), list(epochs, "%g").c_str())};
}

Outcome bistable_switching() {
  const ExperimentResult r = run_experiment(config(
      "residence", "2d-canard", {"N=2000", "horizon=200", "seeds=20", "values=[1.22,1.21,1.2,1.19,1.18]"}));
  std::vector<double> fraction;
  for (const auto& v : r.summary["values"]) fraction.push_back(v["mean_residence_fraction"].get<double>());
  const bool ok = fraction.size() == 5 && inversions(fraction, true) <= 1 && fraction.back() > fraction.front();
  return {ok, fmt("residence fraction for sigma1 = 1.22 .. 1.18: %s", list(fraction, "%.3f").c_str())};
}

Outcome bench_reference() {
  const ExperimentResult r = run_experiment(config("bench", "2d-canard", {}));
  const double wall = r.wall_seconds;
  std::ofstream("acceptance_bench.txt") << fmt("bench wall_seconds %.3f\n", wall);
  Outcome o{true, fmt("%.1f s for N = 2000 per population, T = 1500, dt = 0.01 (reference 66 s)", wall), true};
  if (wall > 66.0) o.detail += "; WARNING: slower than the reference";
  return o;
}

Outcome determinism() {
  struct Case {
    std::string sub, preset;
    std::vector<std::string> sets;
  };
  const std::vector<Case> cases = {
      {"simulate-network", "2d-canard", {"N=300", "horizon=5", "sampled_neurons=6"}},
      {"simulate-meanfield", "3d-mmo", {"horizon=20"}},
      {"fixed-points", "2d-canard", {}},
      {"hopf-scan", "2d-canard", {"steps=60"}},
      {"amplitude-sweep", "2d-canard",
       {"experiment.lower=-0.4", "experiment.upper=0", "step=0.1", "transient=20", "measure_horizon=10"}},
      {"regime-map", "2d-canard", {"x_lower=1.0", "x_upper=1.5", "x_step=0.25", "transient=20", "measure_horizon=10"}},
      {"fold-analysis", "3d-mmo", {"manifold_u1_points=11", "manifold_ze_points=11"}},
      {"fsn2-map", "3d-mmo",
       {"k_lower=-2", "k_upper=-1", "k_step=0.1", "sigma1_lower=1.5", "sigma1_upper=2.5", "sigma1_step=0.5",
        "hopf_epsilons=[0.05]"}},
      {"mmo-classify", "3d-mmo", {"transient=10", "experiment.horizon=20"}},
      {"residence", "2d-canard", {"N=200", "horizon=10", "seeds=2", "values=[1.2]"}},
      {"early-jumps", "3d-mmo", {"N=300", "horizon=30"}},
      {"convergence", "2d-canard", {"sigma1=0.8", "horizon=2", "sizes=[50,100]", "seeds=2"}},
      {"bench", "2d-canard", {"size=200", "experiment.horizon=5"}},
  };
  std::vector<std::string> differing;
  std::size_t files = 0;
  for (const auto& c : cases) {
    const Json r = config(c.sub, c.preset, c.sets);
    std::vector<ExperimentResult> runs;
    for (unsigned threads : {1u, 3u, 1u}) {
      set_thread_count(threads);
      runs.push_back(run_experiment(r));
    }
    set_thread_count(1);
    bool same = true;
    for (std::size_t k = 1; k < runs.size(); ++k) {
      if (runs[k].files.size() != runs[0].files.size()) same = false;
      for (std::size_t i = 0; same && i < runs[0].files.size(); ++i)
        same = runs[k].files[i].name == runs[0].files[i].name && runs[k].files[i].content == runs[0].files[i].content;
    }
    files += runs[0].files.size();
    if (!same) differing.push_back(c.sub);
  }
  std::string detail = fmt("%zu subcommands, %zu files compared over 3 runs (1, 3, 1 threads)", cases.size(), files);
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty() && cases.size() == subcommand_names().size(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "closed-form effective sigmoid matches Monte Carlo", 60, sigmoid_closed_form},
      {2, "mean error decays like N^-1/2", 900, convergence_rate},
      {3, "pairwise correlations vanish with N", 600, propagation_of_chaos},
      {4, "canard explosion narrows with epsilon", 600, canard_explosion},
      {5, "noise drives stationary -> bistable -> oscillatory", 600, noise_induced_transition},
      {6, "Hopf locus approaches the FSN II curve", 900, fsn2_proximity},
      {7, "mixed-mode oscillation signature", 300, mmo_detection},
      {8, "finite networks jump early", 1800, early_jumps},
      {9, "residence near the stationary state grows towards the fold of cycles", 1800, bistable_switching},
      {10, "bench reference time (soft)", std::numeric_limits<double>::infinity(), bench_reference},
      {11, "outputs are byte-identical across runs and thread counts", std::numeric_limits<double>::infinity(),
       determinism},
  };

  set_thread_count(1);
  int failures = 0;
  Json report = Json::array();
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("; exceeded the %.0f s budget", c.budget_seconds);
    }
    if (!o.pass && !o.soft) ++failures;
    std::printf("%s  [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                seconds);
    std::fflush(stdout);
    report.push_back({{"criterion", c.id}, {"pass", o.pass}, {"detail", o.detail}, {"seconds", seconds}});
  }
  std::ofstream("acceptance_report.json") << report.dump(2) << "\n";
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
