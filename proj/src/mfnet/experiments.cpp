#include "mfnet/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>

#include "mfnet/analysis.hpp"
#include "mfnet/bifurcation.hpp"
#include "mfnet/config.hpp"
#include "mfnet/io.hpp"
#include "mfnet/network.hpp"
#include "mfnet/parallel.hpp"
#include "mfnet/slowfast.hpp"

namespace mfnet {

namespace {

using Fmt = std::string (*)(double);
const Fmt F = format_double;

std::string I(long long v) { return std::to_string(v); }
std::string B(bool v) { return v ? "true" : "false"; }

struct Context {
  const Json& config;
  const Json& exp;
  NetworkConfig network;
  MeanFieldModel model;
  ExperimentResult result;

  void table(const std::string& name, const CsvTable& t) { result.files.push_back({name, t.str()}); }
};

std::vector<std::string> state_columns(const MeanFieldModel& m) {
  std::vector<std::string> cols;
  for (std::size_t a = 0; a < m.population_count(); ++a) cols.push_back("mean_" + std::to_string(a + 1));
  if (m.adaptation) cols.push_back("adaptation");
  return cols;
}

std::vector<double> initial_state(const NetworkConfig& c) {
  std::vector<double> s;
  for (const auto& p : c.populations) s.push_back(p.initial_mean);
  if (c.adaptation) s.push_back(c.adaptation->initial);
  return s;
}

RecordingPlan plan_of(const Json& config) {
  const Json& n = config.at("network");
  RecordingPlan plan;
  plan.record_every = n.at("record_every").get<std::size_t>();
  plan.sampled_neurons = n.at("sampled_neurons").get<std::size_t>();
  plan.sample_indices = n.at("sample_indices").get<std::vector<std::size_t>>();
  plan.full = n.at("full_recording").get<bool>();
  return plan;
}

CsvTable trajectory_table(const TrajectoryRecord& rec) {
  std::vector<std::string> cols{"time"};
  const std::size_t p = rec.population_means.empty() ? 0 : rec.population_means[0].size();
  for (std::size_t a = 0; a < p; ++a) cols.push_back("mean_" + std::to_string(a + 1));
  const bool adapt = !rec.adaptation_trace.empty();
  if (adapt) cols.push_back("adaptation");
  for (std::size_t idx : rec.sampled_neurons) cols.push_back("neuron_" + std::to_string(idx));
  CsvTable t(cols);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    std::vector<std::string> row{F(rec.times[i])};
    for (double m : rec.population_means[i]) row.push_back(F(m));
    if (adapt) row.push_back(F(rec.adaptation_trace[i]));
    if (!rec.neuron_samples.empty())
      for (double x : rec.neuron_samples[i]) row.push_back(F(x));
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable solution_table(const MeanFieldModel& m, const OdeSolution& sol) {
  std::vector<std::string> cols{"time"};
  for (auto& c : state_columns(m)) cols.push_back(c);
  CsvTable t(cols);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    std::vector<std::string> row{F(sol.times[i])};
    for (double x : sol.states[i]) row.push_back(F(x));
    t.add_row(std::move(row));
  }
  return t;
}

// Copy of the configuration with `name` set through the override grammar.
Json with_override(const Json& config, const std::string& name, double value) {
  Json c = config;
  apply_override(c, name + "=" + format_double(value));
  return c;
}

void simulate_network_cmd(Context& ctx) {
  const TrajectoryRecord rec = simulate_network(ctx.network, plan_of(ctx.config));
  ctx.table("trajectory.csv", trajectory_table(rec));
  ctx.result.summary["rows"] = rec.size();
  ctx.result.summary["final_means"] = rec.population_means.back();
  if (!rec.adaptation_trace.empty()) ctx.result.summary["final_adaptation"] = rec.adaptation_trace.back();
  ctx.result.summary["seed"] = rec.seed_used;
}

void simulate_meanfield_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  const std::vector<double> initial =
      e.at("initial").is_null() ? initial_state(ctx.network) : e.at("initial").get<std::vector<double>>();
  if (initial.size() != ctx.model.dimension())
    throw InvalidArgument("experiment.initial must have " + std::to_string(ctx.model.dimension()) + " entries");
  const double horizon = e.at("horizon").is_null() ? ctx.network.horizon : e.at("horizon").get<double>();
  const double out_dt = e.at("output_dt").is_null()
                            ? ctx.network.dt * ctx.config.at("network").at("record_every").get<double>()
                            : e.at("output_dt").get<double>();
  const OdeSolution sol = integrate(ctx.model, initial, horizon,
                                    {e.at("abs_tol").get<double>(), e.at("rel_tol").get<double>()}, out_dt);
  ctx.table("trajectory.csv", solution_table(ctx.model, sol));
  ctx.result.summary["rows"] = sol.times.size();
  ctx.result.summary["final_state"] = sol.final_state();
  ctx.result.summary["accepted_steps"] = sol.stats.accepted;
  ctx.result.summary["rejected_steps"] = sol.stats.rejected;
}

void fixed_points_cmd(Context& ctx) {
  const auto box = default_box(ctx.model, ctx.exp.at("adaptation_extent").get<double>());
  const auto fps = find_fixed_points(ctx.model, box, ctx.exp.at("grid_density").get<int>());
  std::vector<std::string> cols{"index"};
  for (auto& c : state_columns(ctx.model)) cols.push_back(c);
  cols.push_back("stability");
  cols.push_back("residual");
  for (std::size_t i = 0; i < ctx.model.dimension(); ++i) {
    cols.push_back("eig_re_" + std::to_string(i + 1));
    cols.push_back("eig_im_" + std::to_string(i + 1));
  }
  CsvTable t(cols);
  int stable = 0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    std::vector<std::string> row{I(static_cast<long long>(i))};
    for (double x : fps[i].location) row.push_back(F(x));
    row.push_back(to_string(fps[i].stability));
    row.push_back(F(fps[i].residual));
    for (const auto& ev : fps[i].eigenvalues) {
      row.push_back(F(ev.real()));
      row.push_back(F(ev.imag()));
    }
    t.add_row(std::move(row));
    stable += fps[i].stable();
  }
  ctx.table("fixed_points.csv", t);
  ctx.result.summary["count"] = fps.size();
  ctx.result.summary["stable"] = stable;
}

void hopf_scan_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  HopfScanOptions opt;
  opt.steps = e.at("steps").get<int>();
  opt.tolerance = e.at("tolerance").get<double>();
  const std::string param = e.at("parameter").get<std::string>();
  const auto points = hopf_locus_1d(ctx.model, param, e.at("lower").get<double>(), e.at("upper").get<double>(), opt);
  std::vector<std::string> cols{"parameter", "value", "real_part", "imag_part"};
  for (auto& c : state_columns(ctx.model)) cols.push_back(c);
  CsvTable t(cols);
  Json values = Json::array();
  for (const auto& p : points) {
    std::vector<std::string> row{param, F(p.parameter_value), F(p.real_part), F(p.imag_part)};
    for (double x : p.state) row.push_back(F(x));
    t.add_row(std::move(row));
    values.push_back(p.parameter_value);
  }
  ctx.table("hopf.csv", t);
  ctx.result.summary["parameter"] = param;
  ctx.result.summary["hopf_values"] = values;
}

CsvTable sweep_table(const MeanFieldModel& m, const SweepCurve& curve) {
  std::vector<std::string> cols{"direction", curve.parameter_name};
  for (auto& c : state_columns(m)) cols.push_back("amplitude_" + c);
  for (const char* c : {"period", "oscillating", "flagged"}) cols.push_back(c);
  CsvTable t(cols);
  auto emit = [&](const char* dir, const std::vector<SweepPoint>& pts) {
    for (const auto& p : pts) {
      std::vector<std::string> row{dir, F(p.parameter)};
      for (double a : p.amplitude) row.push_back(F(a));
      row.push_back(F(p.period));
      row.push_back(B(p.oscillating));
      row.push_back(B(p.flagged));
      t.add_row(std::move(row));
    }
  };
  emit("forward", curve.forward);
  emit("backward", curve.backward);
  return t;
}

MeasureOptions measure_of(const Json& e) {
  MeasureOptions m;
  m.transient = e.at("transient").get<double>();
  m.measure_horizon = e.at("measure_horizon").get<double>();
  return m;
}

void amplitude_sweep_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  const std::string param = e.at("parameter").get<std::string>();
  const double lo = e.at("lower").get<double>(), hi = e.at("upper").get<double>(), step = e.at("step").get<double>();
  SweepOptions sweep;
  sweep.measure = measure_of(e);
  sweep.kick = e.at("kick").get<double>();
  if (e.at("canard_window").get<bool>()) {
    CanardWindowOptions opt;
    opt.sweep = sweep;
    opt.low_fraction = e.at("low_fraction").get<double>();
    opt.high_fraction = e.at("high_fraction").get<double>();
    const CanardWindow w = canard_window(ctx.model, param, lo, hi, step, opt);
    ctx.table("sweep.csv", sweep_table(ctx.model, w.sweep));
    Json& s = ctx.result.summary["canard_window"];
    s["lower"] = w.window.interval_lower;
    s["upper"] = w.window.interval_upper;
    s["width"] = w.window.interval_upper - w.window.interval_lower;
    s["small_amplitude"] = w.small_amplitude;
    s["large_amplitude"] = w.large_amplitude;
    s["jump_ratio"] = w.jump_ratio;
  } else {
    ctx.table("sweep.csv", sweep_table(ctx.model, amplitude_sweep(ctx.model, param, lo, hi, step, sweep)));
  }
  ctx.result.summary["parameter"] = param;
}

void regime_map_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  RegimeOptions opt;
  opt.measure = measure_of(e);
  opt.cycle_threshold = e.at("cycle_threshold").get<double>();
  opt.fixed_point_density = e.at("fixed_point_density").get<int>();
  opt.probes_per_axis = e.at("probes_per_axis").get<int>();
  const std::string xn = e.at("x_parameter").get<std::string>(), yn = e.at("y_parameter").get<std::string>();
  const auto xs = linspace_step(e.at("x_lower").get<double>(), e.at("x_upper").get<double>(), e.at("x_step").get<double>());
  const auto ys = yn.empty() ? std::vector<double>{}
                             : linspace_step(e.at("y_lower").get<double>(), e.at("y_upper").get<double>(),
                                             e.at("y_step").get<double>());
  const RegimeMap map = classify_regimes(ctx.model, xn, xs, yn, ys, opt);
  std::vector<std::string> cols{xn};
  if (!yn.empty()) cols.push_back(yn);
  for (const char* c : {"regime", "stable_fixed_points", "cycle_amplitude", "cycle_period"}) cols.push_back(c);
  CsvTable t(cols);
  std::map<std::string, int> counts;
  for (const auto& c : map.cells) {
    std::vector<std::string> row{F(c.x)};
    if (!yn.empty()) row.push_back(F(c.y));
    row.push_back(to_string(c.regime));
    row.push_back(I(c.stable_fixed_points));
    row.push_back(F(c.cycle_amplitude));
    row.push_back(F(c.cycle_period));
    t.add_row(std::move(row));
    ++counts[to_string(c.regime)];
  }
  ctx.table("regimes.csv", t);
  for (const auto& [k, v] : counts) ctx.result.summary["cells"][k] = v;
}

void fold_analysis_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  const ReducedSystem sys(ctx.model);
  const auto folds = fold_line(sys);
  CsvTable ft({"branch", "u1"});
  for (double u : folds) ft.add_row({u < 0 ? "F-" : "F+", F(u)});
  ctx.table("fold_line.csv", ft);

  CsvTable st({"branch", "kind", "u1", "ze", "u2", "eig1_re", "eig1_im", "eig2_re", "eig2_im", "fold_residual",
               "flow_residual"});
  Json kinds = Json::array();
  if (!folds.empty()) {
    for (const auto& s : folded_singularities(sys)) {
      st.add_row({s.fold_branch < 0 ? "F-" : "F+", to_string(s.kind), F(s.u1), F(s.ze), F(s.u2),
                  F(s.eigenvalue_1.real()), F(s.eigenvalue_1.imag()), F(s.eigenvalue_2.real()),
                  F(s.eigenvalue_2.imag()), F(s.fold_residual), F(s.flow_residual)});
      kinds.push_back((s.fold_branch < 0 ? "F-: " : "F+: ") + to_string(s.kind));
    }
  }
  ctx.table("singularities.csv", st);

  CsvTable mt({"u1", "ze", "u2"});
  for (const auto& m : sample_critical_manifold(sys, e.at("manifold_u1_points").get<std::size_t>(),
                                                e.at("ze_lower").get<double>(), e.at("ze_upper").get<double>(),
                                                e.at("manifold_ze_points").get<std::size_t>()))
    mt.add_row({F(m.u1), F(m.ze), F(m.u2)});
  ctx.table("critical_manifold.csv", mt);
  ctx.result.summary["fold_roots"] = folds;
  ctx.result.summary["singularities"] = kinds;
}

void fsn2_map_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  const double klo = e.at("k_lower").get<double>(), khi = e.at("k_upper").get<double>();
  const auto sigmas = linspace_step(e.at("sigma1_lower").get<double>(), e.at("sigma1_upper").get<double>(),
                                    e.at("sigma1_step").get<double>());
  const Fsn2Curve curve = fsn2_locus(ctx.model, klo, khi, sigmas);
  CsvTable t({"sigma1", "k", "u1", "u2", "ze", "branch", "fold_residual", "flow_residual", "equilibrium_residual"});
  for (const auto& p : curve.points)
    t.add_row({F(p.sigma1), F(p.k), F(p.u1), F(p.u2), F(p.ze), p.fold_branch < 0 ? "F-" : "F+", F(p.fold_residual),
               F(p.flow_residual), F(p.equilibrium_residual)});
  ctx.table("fsn2.csv", t);
  ctx.result.summary["points"] = curve.points.size();
  ctx.result.summary["gaps"] = curve.gaps;

  const auto eps = e.at("hopf_epsilons").get<std::vector<double>>();
  if (eps.empty()) return;
  const int steps = std::max(2, static_cast<int>(std::lround((khi - klo) / e.at("k_step").get<double>())));
  std::vector<std::vector<BifurcationPoint>> cells(eps.size() * sigmas.size());
  std::vector<int> lost(cells.size(), 0);
  parallel_for(cells.size(), [&](std::size_t i) {
    MeanFieldModel m = with_parameter(ctx.model, "epsilon", eps[i / sigmas.size()]);
    m = with_parameter(m, "sigma1", sigmas[i % sigmas.size()]);
    HopfScanOptions opt;
    opt.steps = steps;
    try {
      cells[i] = hopf_locus_1d(m, "k", klo, khi, opt);
    } catch (const BranchLost&) {
      lost[i] = 1;
    }
  });
  CsvTable h({"epsilon", "sigma1", "k", "real_part", "imag_part"});
  Json distances = Json::array();
  for (std::size_t a = 0; a < eps.size(); ++a) {
    double worst = 0.0;
    int compared = 0;
    for (std::size_t b = 0; b < sigmas.size(); ++b) {
      const auto& pts = cells[a * sigmas.size() + b];
      for (const auto& p : pts) h.add_row({F(eps[a]), F(sigmas[b]), F(p.parameter_value), F(p.real_part), F(p.imag_part)});
      for (const auto& f : curve.points) {
        if (f.sigma1 != sigmas[b] || pts.empty()) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pts) best = std::min(best, std::fabs(p.parameter_value - f.k));
        worst = std::max(worst, best);
        ++compared;
      }
    }
    Json d;
    d["epsilon"] = eps[a];
    d["compared_points"] = compared;
    d["max_distance"] = compared ? Json(worst) : Json(nullptr);
    distances.push_back(d);
  }
  ctx.table("hopf_overlay.csv", h);
  ctx.result.summary["hopf_distance"] = distances;
  int lost_count = 0;
  for (int l : lost) lost_count += l;
  ctx.result.summary["hopf_branch_lost_cells"] = lost_count;
}

void mmo_classify_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  const std::size_t pop = e.at("population").get<std::size_t>() - 1;
  if (pop >= ctx.model.population_count()) throw InvalidArgument("experiment.population out of range");
  const double transient = e.at("transient").get<double>();
  std::vector<double> t, v;
  if (e.at("source").get<std::string>() == "meanfield") {
    const OdeSolution sol = integrate(ctx.model, initial_state(ctx.network), transient + e.at("horizon").get<double>(),
                                      {1e-9, 1e-9}, e.at("output_dt").get<double>());
    for (std::size_t i = 0; i < sol.times.size(); ++i)
      if (sol.times[i] >= transient) t.push_back(sol.times[i]), v.push_back(sol.states[i][pop]);
  } else {
    NetworkConfig c = ctx.network;
    c.horizon = transient + e.at("horizon").get<double>();
    RecordingPlan plan = plan_of(ctx.config);
    plan.sampled_neurons = 0;
    plan.sample_indices.clear();
    plan.full = false;
    const TrajectoryRecord rec = simulate_network(c, plan);
    for (std::size_t i = 0; i < rec.size(); ++i)
      if (rec.times[i] >= transient) t.push_back(rec.times[i]), v.push_back(rec.population_means[i][pop]);
  }
  MmoOptions opt;
  opt.large_amp = e.at("large_amp").get<double>();
  opt.small_amp = e.at("small_amp").get<double>();
  opt.large_fraction = e.at("large_fraction").get<double>();
  opt.small_fraction = e.at("small_fraction").get<double>();
  const MmoSignature sig = classify_mmo(t, v, opt);
  CsvTable tr({"time", "value"});
  for (std::size_t i = 0; i < t.size(); ++i) tr.add_row({F(t[i]), F(v[i])});
  ctx.table("trace.csv", tr);
  CsvTable bt({"block", "large", "small"});
  for (std::size_t i = 0; i < sig.blocks.size(); ++i)
    bt.add_row({I(static_cast<long long>(i)), I(sig.blocks[i].large), I(sig.blocks[i].small)});
  ctx.table("mmo_blocks.csv", bt);
  Json& s = ctx.result.summary;
  s["signature"] = sig.notation();
  s["uniform"] = sig.uniform();
  s["blocks"] = sig.blocks.size();
  s["large_amp"] = sig.large_amp;
  s["small_amp"] = sig.small_amp;
}

void residence_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  const std::string param = e.at("parameter").get<std::string>();
  std::vector<double> values = e.at("values").get<std::vector<double>>();
  if (values.empty()) values.push_back(get_parameter(ctx.model, param));
  const int seeds = e.at("seeds").get<int>();
  const std::uint64_t seed0 = ctx.config.at("seed").get<std::uint64_t>();
  RecordingPlan plan = plan_of(ctx.config);
  plan.sampled_neurons = 0;
  plan.sample_indices.clear();
  plan.full = false;

  CsvTable t({param, "seed", "residence_fraction", "switch_count"});
  CsvTable sw({param, "seed", "time"});
  Json per_value = Json::array();
  for (double value : values) {
    const Json cfg_json = with_override(ctx.config, param, value);
    NetworkConfig cfg = network_config(cfg_json);
    const MeanFieldModel model = meanfield_of(cfg);
    std::optional<FixedPoint> fp;
    for (const auto& p : find_fixed_points(model, default_box(model), 12))
      if (p.stable() && !fp) fp = p;
    if (!fp) throw NotApplicable("residence: no stable fixed point at " + param + " = " + format_double(value));

    double radius = e.at("radius").get<double>();
    if (radius == 0.0) {
      std::vector<double> start = fp->location;
      start[0] += 0.5;
      const double horizon = e.at("cycle_horizon").get<double>();
      const OdeSolution sol = integrate(model, start, horizon, {1e-9, 1e-9}, model.epsilon / 4);
      std::vector<std::vector<double>> tail(sol.states.begin() + static_cast<std::ptrdiff_t>(sol.states.size() / 2),
                                            sol.states.end());
      double lo = tail.front()[0], hi = lo;
      for (const auto& s : tail) lo = std::min(lo, s[0]), hi = std::max(hi, s[0]);
      if (hi - lo < 1e-3)
        throw NotApplicable("residence: no stable cycle at " + param + " = " + format_double(value) +
                            "; set experiment.radius explicitly");
      radius = default_residence_radius(fp->location, tail);
    }
    for (std::size_t a = 0; a < cfg.population_count(); ++a) cfg.populations[a].initial_mean = fp->location[a];
    if (cfg.adaptation) cfg.adaptation->initial = fp->location.back();

    double total = 0.0;
    for (int s = 0; s < seeds; ++s) {
      cfg.seed = seed0 + static_cast<std::uint64_t>(s);
      const TrajectoryRecord rec = simulate_network(cfg, plan);
      std::vector<std::vector<double>> states = rec.population_means;
      if (!rec.adaptation_trace.empty())
        for (std::size_t i = 0; i < states.size(); ++i) states[i].push_back(rec.adaptation_trace[i]);
      const SwitchStatistics st = residence_statistics(rec.times, states, fp->location, radius);
      t.add_row({F(value), I(static_cast<long long>(cfg.seed)), F(st.residence_fraction_stationary),
                 I(static_cast<long long>(st.switch_count))});
      for (double time : st.switch_times) sw.add_row({F(value), I(static_cast<long long>(cfg.seed)), F(time)});
      total += st.residence_fraction_stationary;
    }
    Json v;
    v["value"] = value;
    v["radius"] = radius;
    v["fixed_point"] = fp->location;
    v["mean_residence_fraction"] = total / seeds;
    per_value.push_back(v);
  }
  ctx.table("residence.csv", t);
  ctx.table("switch_times.csv", sw);
  ctx.result.summary["parameter"] = param;
  ctx.result.summary["values"] = per_value;
}

void early_jumps_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  EarlyJumpOptions opt;
  opt.population = e.at("population").get<std::size_t>() - 1;
  opt.transient = e.at("transient").get<double>();
  const EarlyJumpReport r = early_jump_experiment(ctx.network, opt);
  CsvTable t({"epoch", "network_onset", "meanfield_onset", "lead_time"});
  for (std::size_t i = 0; i < r.epochs.size(); ++i)
    t.add_row({I(static_cast<long long>(i)), F(r.epochs[i].network_onset), F(r.epochs[i].meanfield_onset),
               F(r.epochs[i].lead_time)});
  ctx.table("early_jumps.csv", t);
  Json& s = ctx.result.summary;
  s["epochs"] = r.epochs.size();
  s["unmatched"] = r.unmatched;
  s["median_lead"] = r.median_lead;
  s["mean_lead"] = r.mean_lead;
}

void convergence_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  ConvergenceOptions opt;
  opt.seeds.clear();
  const std::uint64_t seed0 = ctx.config.at("seed").get<std::uint64_t>();
  for (int s = 0; s < e.at("seeds").get<int>(); ++s) opt.seeds.push_back(seed0 + static_cast<std::uint64_t>(s));
  opt.record_every = e.at("record_every").get<std::size_t>();
  opt.check_regime = e.at("check_regime").get<bool>();
  const auto sizes = e.at("sizes").get<std::vector<int>>();
  const ConvergenceReport r = convergence_experiment(ctx.network, sizes, opt);
  CsvTable t({"size", "seed", "sup_error"});
  for (std::size_t i = 0; i < r.sizes.size(); ++i)
    for (std::size_t s = 0; s < opt.seeds.size(); ++s)
      t.add_row({I(r.sizes[i]), I(static_cast<long long>(opt.seeds[s])), F(r.per_seed[i][s])});
  ctx.table("convergence.csv", t);
  Json report;
  report["sizes"] = r.sizes;
  report["errors"] = r.errors;
  report["fit_skipped"] = r.fit_skipped;
  report["slope"] = r.fit_skipped ? Json(nullptr) : Json(r.slope);
  report["slope_stderr"] = r.fit_skipped ? Json(nullptr) : Json(r.slope_stderr);
  report["intercept"] = r.fit_skipped ? Json(nullptr) : Json(r.intercept);
  ctx.result.files.push_back({"convergence.json", report.dump(2) + "\n"});
  ctx.result.summary = report;
}

void bench_cmd(Context& ctx) {
  const Json& e = ctx.exp;
  NetworkConfig c = ctx.network;
  for (auto& p : c.populations) p.size = e.at("size").get<int>();
  c.horizon = e.at("horizon").get<double>();
  c.dt = e.at("dt").get<double>();
  RecordingPlan plan;
  plan.record_every = 100;
  plan.sampled_neurons = 0;
  const auto start = std::chrono::steady_clock::now();
  const TrajectoryRecord rec = simulate_network(c, plan);
  ctx.result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ctx.result.summary["neurons"] = c.neuron_count();
  ctx.result.summary["steps"] = static_cast<std::uint64_t>(std::llround(c.horizon / c.dt));
  ctx.result.summary["final_means"] = rec.population_means.back();
}

const std::map<std::string, std::function<void(Context&)>>& commands() {
  static const std::map<std::string, std::function<void(Context&)>> table = {
      {"simulate-network", simulate_network_cmd}, {"simulate-meanfield", simulate_meanfield_cmd},
      {"fixed-points", fixed_points_cmd},         {"hopf-scan", hopf_scan_cmd},
      {"amplitude-sweep", amplitude_sweep_cmd},   {"regime-map", regime_map_cmd},
      {"fold-analysis", fold_analysis_cmd},       {"fsn2-map", fsn2_map_cmd},
      {"mmo-classify", mmo_classify_cmd},         {"residence", residence_cmd},
      {"early-jumps", early_jumps_cmd},           {"convergence", convergence_cmd},
      {"bench", bench_cmd},
  };
  return table;
}

}  // namespace

ExperimentResult run_experiment(const Json& resolved) {
  if (resolved.contains("threads")) set_thread_count(resolved.at("threads").get<unsigned>());
  const std::string sub = resolved.at("subcommand").get<std::string>();
  const auto it = commands().find(sub);
  if (it == commands().end()) throw InvalidArgument("unknown subcommand '" + sub + "'");

  const NetworkConfig network = network_config(resolved);
  Context ctx{resolved, resolved.at("experiment"), network, meanfield_of(network), {}};
  ctx.result.summary = Json::object();
  it->second(ctx);

  const Json echo = echo_config(resolved);
  Json manifest = Json::object();
  manifest["subcommand"] = sub;
  manifest["seed"] = resolved.at("seed");
  Json files = Json::array();
  for (const auto& f : ctx.result.files) files.push_back(f.name);
  manifest["files"] = files;
  Json warnings = Json::array();
  for (const auto& w : network.warnings()) warnings.push_back(w);
  manifest["warnings"] = warnings;
  manifest["summary"] = ctx.result.summary;
  manifest["config"] = echo;
  ctx.result.files.push_back({"manifest.json", manifest.dump(2) + "\n"});
  ctx.result.files.push_back({"resolved_config.json", echo.dump(2) + "\n"});
  return std::move(ctx.result);
}

void write_result(const ExperimentResult& result, const std::string& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + directory + "': " + ec.message());
  for (const auto& f : result.files) write_file_atomic((std::filesystem::path(directory) / f.name).string(), f.content);
}

}  // namespace mfnet
