#include "mfnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mfnet/errors.hpp"
#include "mfnet/parallel.hpp"

namespace mfnet {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

bool MmoSignature::uniform() const {
  return std::all_of(blocks.begin(), blocks.end(), [&](const MmoBlock& b) {
    return b.large == blocks.front().large && b.small == blocks.front().small;
  });
}

bool MmoSignature::has_large_and_small() const {
  return std::any_of(blocks.begin(), blocks.end(), [](const MmoBlock& b) { return b.large > 0 && b.small > 0; });
}

std::string MmoSignature::notation() const {
  if (blocks.empty()) return "";
  std::ostringstream out;
  const std::size_t n = uniform() ? 1 : blocks.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ' ';
    out << blocks[i].large << '^' << blocks[i].small;
  }
  return out.str();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_line: need at least two paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    fit.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

MmoSignature classify_mmo(const std::vector<double>& times, const std::vector<double>& values,
                          const MmoOptions& options) {
  require(times.size() == values.size(), "classify_mmo: times and values differ in length");
  require(values.size() >= 3, "classify_mmo: trace needs at least 3 samples");
  const bool explicit_large = options.large_amp > 0.0, explicit_small = options.small_amp > 0.0;
  require(explicit_large == explicit_small, "classify_mmo: give both thresholds or neither");
  if (explicit_large)
    require(options.small_amp < options.large_amp, "classify_mmo: need 0 < small_amp < large_amp");
  else
    require(options.small_fraction > 0.0 && options.small_fraction < options.large_fraction,
            "classify_mmo: need 0 < small_fraction < large_fraction");

  const LineFit trend = fit_line(times, values);
  std::vector<double> r(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) r[i] = values[i] - trend.intercept - trend.slope * times[i];
  const auto [lo_it, hi_it] = std::minmax_element(r.begin(), r.end());
  const double range = *hi_it - *lo_it;

  MmoSignature sig;
  sig.large_amp = explicit_large ? options.large_amp : options.large_fraction * range;
  sig.small_amp = explicit_small ? options.small_amp : options.small_fraction * range;
  const double scale = std::max(1.0, std::fabs(*hi_it) + std::fabs(*lo_it));
  if (!(range > 1e-12 * scale)) return sig;

  // Alternating confirmed extrema; dir = +1 while a maximum is pending.
  const double h = sig.small_amp;
  std::vector<double> maxima, minima_after;
  int dir = 0;
  double hi = r[0], lo = r[0];
  for (double v : r) {
    if (dir == 0) {
      hi = std::max(hi, v);
      lo = std::min(lo, v);
      if (v <= hi - h) {
        maxima.push_back(hi);
        dir = -1;
        lo = v;
      } else if (v >= lo + h) {
        dir = +1;
        hi = v;
      }
    } else if (dir > 0) {
      if (v > hi) hi = v;
      if (v <= hi - h) {
        maxima.push_back(hi);
        dir = -1;
        lo = v;
      }
    } else {
      if (v < lo) lo = v;
      if (v >= lo + h) {
        minima_after.push_back(lo);
        dir = +1;
        hi = v;
      }
    }
  }

  std::vector<bool> large;
  for (std::size_t i = 0; i < minima_after.size() && i < maxima.size(); ++i) {
    const double amp = maxima[i] - minima_after[i];
    if (amp >= sig.large_amp)
      large.push_back(true);
    else if (amp >= sig.small_amp)
      large.push_back(false);
  }

  // Without small oscillations every large one is its own 1^0 block.
  if (std::all_of(large.begin(), large.end(), [](bool l) { return l; })) {
    sig.blocks.assign(large.size(), MmoBlock{1, 0});
    if (sig.blocks.size() > 1) sig.blocks.pop_back();
    return sig;
  }
  std::size_t i = 0;
  while (i < large.size() && !large[i]) ++i;
  while (i < large.size()) {
    MmoBlock b;
    while (i < large.size() && large[i]) ++b.large, ++i;
    while (i < large.size() && !large[i]) ++b.small, ++i;
    sig.blocks.push_back(b);
  }
  if (sig.blocks.size() > 1) sig.blocks.pop_back();
  return sig;
}

SwitchStatistics residence_statistics(const std::vector<double>& times,
                                      const std::vector<std::vector<double>>& states,
                                      const std::vector<double>& fixed_point, double radius) {
  require(radius > 0.0, "residence_statistics: radius must be positive");
  require(times.size() == states.size(), "residence_statistics: times and states differ in length");
  SwitchStatistics s;
  if (times.empty()) return s;
  bool near = distance(states[0], fixed_point) <= radius;
  for (std::size_t i = 0; i < states.size(); ++i) {
    require(states[i].size() == fixed_point.size(), "residence_statistics: state dimension mismatch");
    const double d = distance(states[i], fixed_point);
    if (near && d > 1.2 * radius) {
      near = false;
      s.switch_times.push_back(times[i]);
    } else if (!near && d <= radius) {
      near = true;
      s.switch_times.push_back(times[i]);
    }
    (near ? s.near_samples : s.far_samples) += 1;
  }
  s.switch_count = s.switch_times.size();
  s.residence_fraction_stationary = static_cast<double>(s.near_samples) / static_cast<double>(states.size());
  return s;
}

double default_residence_radius(const std::vector<double>& fixed_point,
                                const std::vector<std::vector<double>>& cycle) {
  require(!cycle.empty(), "default_residence_radius: empty cycle");
  double d = std::numeric_limits<double>::infinity();
  for (const auto& x : cycle) d = std::min(d, distance(x, fixed_point));
  return 0.5 * d;
}

JumpLevels jump_levels(const std::vector<double>& reference) {
  require(!reference.empty(), "jump_levels: empty reference trace");
  const auto [lo, hi] = std::minmax_element(reference.begin(), reference.end());
  return {*lo + 0.25 * (*hi - *lo), *lo + 0.5 * (*hi - *lo)};
}

std::vector<double> jump_onsets(const std::vector<double>& times, const std::vector<double>& values,
                                const JumpLevels& levels) {
  require(times.size() == values.size(), "jump_onsets: times and values differ in length");
  std::vector<double> onsets;
  bool armed = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < levels.arm) armed = true;
    if (armed && i > 0 && values[i - 1] < levels.onset && values[i] >= levels.onset) {
      const double w = (levels.onset - values[i - 1]) / (values[i] - values[i - 1]);
      onsets.push_back(times[i - 1] + w * (times[i] - times[i - 1]));
      armed = false;
    }
  }
  return onsets;
}

namespace {

void summarize(EarlyJumpReport& report) {
  std::vector<double> leads;
  for (const auto& e : report.epochs) leads.push_back(e.lead_time);
  report.median_lead = median_of(leads);
  report.mean_lead = leads.empty() ? 0.0 : std::accumulate(leads.begin(), leads.end(), 0.0) / leads.size();
}

}  // namespace

EarlyJumpReport detect_early_jump(const std::vector<double>& network_times,
                                  const std::vector<double>& network_values,
                                  const std::vector<double>& meanfield_times,
                                  const std::vector<double>& meanfield_values,
                                  std::optional<JumpLevels> levels) {
  require(!meanfield_values.empty(), "detect_early_jump: empty mean-field trace");
  const JumpLevels lv = levels ? *levels : jump_levels(meanfield_values);
  const auto mf = jump_onsets(meanfield_times, meanfield_values, lv);
  if (mf.empty()) throw NotApplicable("detect_early_jump: no large oscillation in the mean-field trace");
  const auto net = jump_onsets(network_times, network_values, lv);

  EarlyJumpReport report;
  for (std::size_t k = 0; k < mf.size(); ++k) {
    const double before = k > 0 ? mf[k] - mf[k - 1] : (mf.size() > 1 ? mf[1] - mf[0] : mf[0] - meanfield_times.front());
    const double after = k + 1 < mf.size() ? mf[k + 1] - mf[k] : before;
    const double lo = mf.size() > 1 ? mf[k] - 0.5 * before : -std::numeric_limits<double>::infinity();
    const double hi = mf.size() > 1 ? mf[k] + 0.5 * after : std::numeric_limits<double>::infinity();
    const double* best = nullptr;
    for (const double& t : net)
      if (t >= lo && t < hi && (!best || std::fabs(t - mf[k]) < std::fabs(*best - mf[k]))) best = &t;
    if (!best) {
      ++report.unmatched;
      continue;
    }
    report.epochs.push_back({mf[k], *best, mf[k] - *best});
  }
  summarize(report);
  return report;
}

EarlyJumpReport early_jump_experiment(const NetworkConfig& config, const EarlyJumpOptions& options) {
  config.validate();
  if (!config.adaptation) throw InvalidArgument("early_jump_experiment: configuration has no adaptation block");
  require(options.population < config.population_count(), "early_jump_experiment: population out of range");

  RecordingPlan plan;
  plan.record_every = 1;
  plan.sampled_neurons = 0;
  const TrajectoryRecord rec = simulate_adaptation_network(config, plan);
  const MeanFieldModel model = meanfield_of(config);

  std::vector<double> t, v;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec.times[i] < options.transient) continue;
    t.push_back(rec.times[i]);
    v.push_back(rec.population_means[i][options.population]);
    rows.push_back(i);
  }
  if (v.empty()) throw NotApplicable("early_jump_experiment: transient covers the whole run");
  const JumpLevels levels = jump_levels(v);
  const auto onsets = jump_onsets(t, v, levels);
  if (onsets.size() < 2) throw NotApplicable("early_jump_experiment: fewer than two network jumps");

  std::vector<double> gaps;
  for (std::size_t k = 1; k < onsets.size(); ++k) gaps.push_back(onsets[k] - onsets[k - 1]);
  const double typical = median_of(gaps);

  std::vector<std::optional<EarlyJumpEpoch>> slots(onsets.size() - 1);
  parallel_for(slots.size(), [&](std::size_t k) {
    const auto it = std::lower_bound(t.begin(), t.end(), onsets[k]);
    const std::size_t row = rows[static_cast<std::size_t>(it - t.begin())];
    std::vector<double> start = rec.population_means[row];
    start.push_back(rec.adaptation_trace[row]);
    const double t0 = rec.times[row];
    const double horizon = 3.0 * std::max(onsets[k + 1] - onsets[k], typical);
    OdeOptions ode;
    ode.tolerances = options.tolerances;
    ode.output_dt = config.dt;
    const OdeSolution sol = integrate_ode(
        [&](double, std::span<const double> y, std::span<double> dy) { rhs(model, y, dy); }, start, t0, horizon,
        ode);
    const auto mf = jump_onsets(sol.times, sol.component(options.population), levels);
    if (mf.empty()) return;
    slots[k] = EarlyJumpEpoch{mf.front(), onsets[k + 1], mf.front() - onsets[k + 1]};
  });

  EarlyJumpReport report;
  for (const auto& s : slots) {
    if (s)
      report.epochs.push_back(*s);
    else
      ++report.unmatched;
  }
  summarize(report);
  return report;
}

double meanfield_distance(const NetworkConfig& config, const TrajectoryRecord& record,
                          const Tolerances& tolerances) {
  require(record.size() >= 2, "meanfield_distance: record needs at least two rows");
  const MeanFieldModel model = meanfield_of(config);
  std::vector<double> start = record.population_means.front();
  if (config.adaptation) start.push_back(record.adaptation_trace.front());
  const double t0 = record.times.front();
  const double h = record.times[1] - t0;
  const OdeSolution sol = integrate(model, start, record.times.back() - t0, tolerances, h);

  double sup = 0.0;
  for (std::size_t i = 0; i < record.size(); ++i) {
    const double rel = (record.times[i] - t0) / h;
    const std::size_t j = std::min(static_cast<std::size_t>(std::lround(rel)), sol.times.size() - 1);
    std::vector<double> ref = sol.states[j];
    const double gap = record.times[i] - sol.times[j];
    if (std::fabs(gap) > 1e-9 * std::max(1.0, std::fabs(record.times[i]))) {
      const std::size_t a = gap > 0 ? j : j - 1;
      const std::size_t b = std::min(a + 1, sol.times.size() - 1);
      const double w = b == a ? 0.0 : (record.times[i] - sol.times[a]) / (sol.times[b] - sol.times[a]);
      for (std::size_t c = 0; c < ref.size(); ++c) ref[c] = (1 - w) * sol.states[a][c] + w * sol.states[b][c];
    }
    for (std::size_t p = 0; p < config.population_count(); ++p)
      sup = std::max(sup, std::fabs(record.population_means[i][p] - ref[p]));
  }
  return sup;
}

ConvergenceReport convergence_experiment(const NetworkConfig& base, const std::vector<int>& sizes,
                                         const ConvergenceOptions& options) {
  require(sizes.size() >= 2, "convergence_experiment: need at least two sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    require(sizes[i] >= 1, "convergence_experiment: sizes must be positive");
    if (i) require(sizes[i] > sizes[i - 1], "convergence_experiment: sizes must be strictly increasing");
  }
  require(!options.seeds.empty(), "convergence_experiment: need at least one seed");
  base.validate();

  if (options.check_regime) {
    const MeanFieldModel model = meanfield_of(base);
    const RegimeMap map = classify_regimes(model, "tau1", {get_parameter(model, "tau1")}, "", {}, options.regime);
    if (map.at(0).regime == Regime::kBistable)
      throw BistableRegime(
          "convergence_experiment: the limit system has coexisting stable equilibrium and cycle; "
          "the distance to a single limit trajectory is not well defined");
  }

  ConvergenceReport report;
  report.sizes = sizes;
  RecordingPlan plan;
  plan.record_every = options.record_every;
  plan.sampled_neurons = 0;
  for (int n : sizes) {
    NetworkConfig cfg = base;
    for (auto& p : cfg.populations) p.size = n;
    std::vector<double> errs;
    for (std::uint64_t seed : options.seeds) {
      cfg.seed = seed;
      errs.push_back(meanfield_distance(cfg, simulate_network(cfg, plan), options.tolerances));
    }
    report.errors.push_back(std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size());
    report.per_seed.push_back(std::move(errs));
  }

  const auto [lo, hi] = std::minmax_element(report.errors.begin(), report.errors.end());
  if (!(*lo > 0.0) || (*hi - *lo) <= 1e-9 * *hi) {
    report.fit_skipped = true;
    return report;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(sizes[i])));
    ly.push_back(std::log(report.errors[i]));
  }
  const LineFit fit = fit_line(lx, ly);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.slope_stderr = fit.slope_stderr;
  return report;
}

}  // namespace mfnet
