#include "mfnet/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfnet/errors.hpp"
#include "mfnet/parallel.hpp"

namespace mfnet {

namespace {

constexpr double kAcceptResidual = 1e-10;
constexpr double kImagThreshold = 1e-9;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Max real part over eigenvalues belonging to complex pairs; NaN if none.
double hopf_monitor(const std::vector<std::complex<double>>& ev) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& l : ev) {
    if (std::abs(l.imag()) > kImagThreshold * std::max(1.0, std::abs(l))) {
      best = std::isnan(best) ? l.real() : std::max(best, l.real());
    }
  }
  return best;
}

double determinant_at(const MeanFieldModel& model, std::span<const double> state) {
  return jacobian(model, state).determinant();
}

}  // namespace

std::string to_string(Stability s) {
  switch (s) {
    case Stability::kStableNode: return "stable-node";
    case Stability::kStableFocus: return "stable-focus";
    case Stability::kSaddle: return "saddle";
    case Stability::kUnstableFocus: return "unstable-focus";
    case Stability::kUnstableNode: return "unstable-node";
    case Stability::kCenterLike: return "center-like";
  }
  return "unknown";
}

std::string to_string(BifurcationKind kind) {
  switch (kind) {
    case BifurcationKind::kHopf: return "hopf";
    case BifurcationKind::kFoldOfCycles: return "fold-of-cycles";
    case BifurcationKind::kCanardInterval: return "canard-interval";
  }
  return "unknown";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kStationary: return "stationary";
    case Regime::kBistable: return "bistable";
    case Regime::kOscillatory: return "oscillatory";
  }
  return "unknown";
}

std::vector<std::complex<double>> eigenvalues_at(const MeanFieldModel& model, std::span<const double> state) {
  const Eigen::MatrixXd jac = jacobian(model, state);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jac, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()[i]);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

Stability classify_stability(const std::vector<std::complex<double>>& ev) {
  bool any_pos = false, any_neg = false, any_zero = false, any_complex = false;
  for (const auto& l : ev) {
    const double scale = std::max(1.0, std::abs(l));
    if (std::abs(l.real()) <= 1e-9 * scale) {
      any_zero = true;
    } else if (l.real() > 0) {
      any_pos = true;
    } else {
      any_neg = true;
    }
    if (std::abs(l.imag()) > kImagThreshold * scale) any_complex = true;
  }
  if (any_pos && any_neg) return Stability::kSaddle;
  if (any_zero) return any_pos ? Stability::kSaddle : Stability::kCenterLike;
  if (any_neg) return any_complex ? Stability::kStableFocus : Stability::kStableNode;
  return any_complex ? Stability::kUnstableFocus : Stability::kUnstableNode;
}

std::optional<FixedPoint> refine_fixed_point(const MeanFieldModel& model, std::vector<double> x,
                                             int max_iterations) {
  const std::size_t n = model.dimension();
  if (x.size() != n) throw InvalidArgument("refine_fixed_point: guess dimension mismatch");
  std::vector<double> f(n), trial(n), ft(n);
  rhs(model, x, f);
  double res = norm2(f);
  for (int it = 0; it < max_iterations && res > 1e-14; ++it) {
    const Eigen::MatrixXd jac = jacobian(model, x);
    Eigen::VectorXd rhs_vec(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs_vec(static_cast<Eigen::Index>(i)) = -f[i];
    const Eigen::VectorXd dx = jac.fullPivLu().solve(rhs_vec);
    if (!dx.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + lambda * dx(static_cast<Eigen::Index>(i));
      rhs(model, trial, ft);
      const double rt = norm2(ft);
      if (std::isfinite(rt) && rt < res) {
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
    x.swap(trial);
    f.swap(ft);
    const double previous = res;
    res = norm2(f);
    if (dx.norm() * lambda < 1e-15 * std::max(1.0, norm2(x)) && res >= previous * 0.5) break;
  }
  if (!(res < kAcceptResidual)) return std::nullopt;
  FixedPoint fp;
  fp.location = std::move(x);
  fp.residual = res;
  fp.eigenvalues = eigenvalues_at(model, fp.location);
  fp.stability = classify_stability(fp.eigenvalues);
  return fp;
}

SearchBox default_box(const MeanFieldModel& model, double adaptation_extent) {
  SearchBox box;
  for (std::size_t a = 0; a < model.population_count(); ++a) {
    box.lower.push_back(-1.0);
    box.upper.push_back(1.0);
  }
  if (model.adaptation) {
    box.lower.push_back(-adaptation_extent);
    box.upper.push_back(adaptation_extent);
  }
  return box;
}

std::vector<FixedPoint> find_fixed_points(const MeanFieldModel& model, const SearchBox& box, int density) {
  model.validate();
  const std::size_t n = model.dimension();
  require(box.lower.size() == n && box.upper.size() == n, "find_fixed_points: box dimension mismatch");
  require(density >= 1, "find_fixed_points: grid_density must be >= 1");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(box.lower[i]) && std::isfinite(box.upper[i]) && box.lower[i] <= box.upper[i],
            "find_fixed_points: box must be bounded");
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(density);
  std::vector<std::optional<FixedPoint>> found(total);
  parallel_for(total, [&](std::size_t index) {
    std::vector<double> guess(n);
    std::size_t rest = index;
    for (std::size_t i = 0; i < n; ++i) {
      const auto cell = rest % static_cast<std::size_t>(density);
      rest /= static_cast<std::size_t>(density);
      guess[i] = box.lower[i] + (static_cast<double>(cell) + 0.5) / density * (box.upper[i] - box.lower[i]);
    }
    found[index] = refine_fixed_point(model, std::move(guess));
  });
  std::vector<FixedPoint> unique;
  for (auto& candidate : found) {
    if (!candidate) continue;
    auto dup = std::find_if(unique.begin(), unique.end(), [&](const FixedPoint& u) {
      return distance(u.location, candidate->location) < 1e-6;
    });
    if (dup == unique.end()) {
      unique.push_back(std::move(*candidate));
    } else if (candidate->residual < dup->residual) {
      *dup = std::move(*candidate);
    }
  }
  std::sort(unique.begin(), unique.end(),
            [](const FixedPoint& a, const FixedPoint& b) { return a.location < b.location; });
  return unique;
}

std::vector<double> linspace_step(double lower, double upper, double step) {
  require(step > 0.0, "step must be positive");
  require(upper >= lower, "range upper bound below lower bound");
  const auto count = static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(lower + static_cast<double>(i) * step);
  return out;
}

std::vector<BifurcationPoint> hopf_locus_1d(const MeanFieldModel& base, const std::string& parameter,
                                            double lower, double upper, const HopfScanOptions& options) {
  require(upper > lower, "hopf_locus_1d: empty parameter range");
  require(options.steps >= 1, "hopf_locus_1d: steps must be >= 1");
  MeanFieldModel model = base;
  set_parameter(model, parameter, lower);

  std::optional<FixedPoint> start;
  if (options.seed) {
    start = refine_fixed_point(model, *options.seed);
  } else {
    const auto points = find_fixed_points(model, options.box ? *options.box : default_box(model), 12);
    auto stable = std::find_if(points.begin(), points.end(), [](const FixedPoint& p) { return p.stable(); });
    if (stable != points.end()) {
      start = *stable;
    } else if (!points.empty()) {
      start = points.front();
    }
  }
  if (!start) throw BranchLost("hopf_locus_1d: no equilibrium at the start of the range", lower);

  struct Sample {
    double p;
    std::vector<double> x;
    double monitor;
    double det;
  };
  auto sample_at = [&](double p, const std::vector<double>& guess) -> std::optional<Sample> {
    MeanFieldModel m = base;
    set_parameter(m, parameter, p);
    auto fp = refine_fixed_point(m, guess);
    if (!fp) return std::nullopt;
    return Sample{p, fp->location, hopf_monitor(fp->eigenvalues), determinant_at(m, fp->location)};
  };

  std::vector<BifurcationPoint> out;
  const double h = (upper - lower) / options.steps;
  Sample prev{lower, start->location, hopf_monitor(start->eigenvalues), determinant_at(model, start->location)};
  std::vector<double> prev_prev_x;
  for (int i = 1; i <= options.steps; ++i) {
    const double p = i == options.steps ? upper : lower + i * h;
    std::vector<double> guess = prev.x;
    if (!prev_prev_x.empty()) {
      for (std::size_t d = 0; d < guess.size(); ++d) guess[d] += prev.x[d] - prev_prev_x[d];
    }
    auto cur = sample_at(p, guess);
    if (!cur || distance(cur->x, prev.x) > 0.25) cur = sample_at(p, prev.x);
    if (!cur) {
      std::ostringstream msg;
      msg << "hopf_locus_1d: equilibrium branch lost after " << parameter << "=" << prev.p;
      throw BranchLost(msg.str(), prev.p);
    }
    if (std::signbit(cur->det) != std::signbit(prev.det)) {
      std::ostringstream msg;
      msg << "hopf_locus_1d: equilibrium branch folds between " << parameter << "=" << prev.p << " and " << p;
      throw BranchLost(msg.str(), prev.p);
    }
    if (!std::isnan(prev.monitor) && !std::isnan(cur->monitor) &&
        std::signbit(prev.monitor) != std::signbit(cur->monitor)) {
      // Illinois-modified regula falsi on the monitor.
      Sample a = prev, b = *cur;
      double fa = a.monitor, fb = b.monitor;
      int side = 0;
      Sample best = std::abs(fa) < std::abs(fb) ? a : b;
      for (int it = 0; it < 200; ++it) {
        if (std::abs(best.monitor) < options.tolerance && std::abs(b.p - a.p) < options.parameter_tolerance) break;
        double pm = (a.p * fb - b.p * fa) / (fb - fa);
        // Fall back to bisection when the secant stalls near one end.
        if (!(pm > std::min(a.p, b.p) && pm < std::max(a.p, b.p)) || it % 8 == 7) pm = 0.5 * (a.p + b.p);
        const double w = (pm - a.p) / (b.p - a.p);
        std::vector<double> g(a.x.size());
        for (std::size_t d = 0; d < g.size(); ++d) g[d] = a.x[d] + w * (b.x[d] - a.x[d]);
        auto m = sample_at(pm, g);
        if (!m || std::isnan(m->monitor)) break;
        if (std::abs(m->monitor) < std::abs(best.monitor)) best = *m;
        if (std::signbit(m->monitor) == std::signbit(fa)) {
          a = *m;
          fa = m->monitor;
          if (side == -1) fb *= 0.5;
          side = -1;
        } else {
          b = *m;
          fb = m->monitor;
          if (side == 1) fa *= 0.5;
          side = 1;
        }
        if (std::abs(b.p - a.p) < 1e-15 * std::max(1.0, std::abs(a.p))) break;
      }
      MeanFieldModel m = base;
      set_parameter(m, parameter, best.p);
      const auto ev = eigenvalues_at(m, best.x);
      double imag = 0.0;
      for (const auto& l : ev) {
        if (std::abs(l.real() - best.monitor) < 1e-12 * std::max(1.0, std::abs(l)) + 1e-14) {
          imag = std::max(imag, std::abs(l.imag()));
        }
      }
      BifurcationPoint bp;
      bp.kind = BifurcationKind::kHopf;
      bp.parameter_name = parameter;
      bp.parameter_value = best.p;
      bp.interval_lower = std::min(a.p, b.p);
      bp.interval_upper = std::max(a.p, b.p);
      bp.state = best.x;
      bp.real_part = best.monitor;
      bp.imag_part = imag;
      if (imag > 1e-6) out.push_back(std::move(bp));
    }
    prev_prev_x = prev.x;
    prev = std::move(*cur);
  }
  return out;
}

double estimate_period(const std::vector<double>& times, const std::vector<double>& v) {
  if (v.size() < 3) return 0.0;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double mid = 0.5 * (*lo_it + *hi_it);
  std::vector<double> peaks;
  bool armed = true;  // require a dip below mid-range between counted maxima
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] < mid) armed = true;
    if (armed && v[i] > mid && v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      const double denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
      const double shift = denom != 0.0 ? 0.5 * (v[i - 1] - v[i + 1]) / denom : 0.0;
      const double dt = times[i + 1] - times[i];
      peaks.push_back(times[i] + std::clamp(shift, -0.5, 0.5) * dt);
      armed = false;
    }
  }
  if (peaks.size() < 2) return 0.0;
  return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

AttractorMeasure measure_attractor(const MeanFieldModel& model, std::vector<double> initial,
                                   const MeasureOptions& options) {
  double out_dt = options.output_dt;
  if (out_dt <= 0.0) {
    out_dt = *std::min_element(model.time_constants.begin(), model.time_constants.end()) / 2.0;
  }
  const auto warm = integrate(model, std::move(initial), options.transient, options.tolerances);
  const auto window = integrate(model, warm.final_state(), options.measure_horizon, options.tolerances, out_dt);
  AttractorMeasure m;
  m.final_state = window.final_state();
  const std::size_t n = model.dimension();
  const std::size_t len = window.states.size();
  m.amplitude.assign(n, 0.0);
  std::vector<double> first_half(n, 0.0), second_half(n, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    double lo1 = lo, hi1 = hi, lo2 = lo, hi2 = hi;
    for (std::size_t i = 0; i < len; ++i) {
      const double v = window.states[i][d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if (2 * i < len) {
        lo1 = std::min(lo1, v);
        hi1 = std::max(hi1, v);
      } else {
        lo2 = std::min(lo2, v);
        hi2 = std::max(hi2, v);
      }
    }
    m.amplitude[d] = hi - lo;
    first_half[d] = hi1 - lo1;
    second_half[d] = hi2 - lo2;
  }
  const std::size_t c = std::min(options.period_coordinate, n - 1);
  m.oscillating = m.amplitude[c] > options.amplitude_threshold;
  if (m.oscillating) {
    const double a1 = first_half[c], a2 = second_half[c];
    m.converged = !(a2 < 0.5 * a1 || a2 > 2.0 * a1);
    m.period = estimate_period(window.times, window.component(c));
  }
  return m;
}

namespace {

std::vector<double> kicked(std::vector<double> state, double kick) {
  for (auto& v : state) v += kick;
  return state;
}

std::vector<double> default_sweep_start(const MeanFieldModel& model) {
  const auto points = find_fixed_points(model, default_box(model), 12);
  for (const auto& p : points) {
    if (p.stable()) return p.location;
  }
  if (!points.empty()) return points.front().location;
  return std::vector<double>(model.dimension(), 0.0);
}

SweepPoint sweep_point(const MeanFieldModel& base, const std::string& parameter, double p,
                       const std::vector<double>& start, const SweepOptions& options) {
  const MeanFieldModel m = with_parameter(base, parameter, p);
  const auto meas = measure_attractor(m, kicked(start, options.kick), options.measure);
  SweepPoint sp;
  sp.parameter = p;
  sp.amplitude = meas.amplitude;
  sp.period = meas.period;
  sp.oscillating = meas.oscillating;
  sp.flagged = !meas.converged;
  sp.final_state = meas.final_state;
  return sp;
}

}  // namespace

SweepCurve amplitude_sweep(const MeanFieldModel& model, const std::string& parameter, double lower,
                           double upper, double step, const SweepOptions& options) {
  const auto grid = linspace_step(lower, upper, step);
  SweepCurve curve;
  curve.parameter_name = parameter;
  std::vector<double> state =
      options.initial ? *options.initial : default_sweep_start(with_parameter(model, parameter, lower));
  for (double p : grid) {
    curve.forward.push_back(sweep_point(model, parameter, p, state, options));
    state = curve.forward.back().final_state;
  }
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    curve.backward.push_back(sweep_point(model, parameter, *it, state, options));
    state = curve.backward.back().final_state;
  }
  return curve;
}

CanardWindow canard_window(const MeanFieldModel& model, const std::string& parameter, double lower,
                           double upper, double step, const CanardWindowOptions& options) {
  CanardWindow out;
  out.sweep = amplitude_sweep(model, parameter, lower, upper, step, options.sweep);
  const std::size_t c = options.sweep.measure.period_coordinate;
  double a_max = 0.0;
  for (const auto* branch : {&out.sweep.forward, &out.sweep.backward}) {
    for (const auto& sp : *branch) a_max = std::max(a_max, sp.amplitude.at(c));
  }
  if (!(a_max > options.sweep.measure.amplitude_threshold)) {
    throw NotApplicable("canard_window: no oscillation anywhere in the swept range");
  }
  double win_lo = std::numeric_limits<double>::infinity();
  double win_hi = -win_lo;
  double small = std::numeric_limits<double>::infinity();
  double large = 0.0;
  for (const auto* branch : {&out.sweep.forward, &out.sweep.backward}) {
    for (double fraction : {options.low_fraction, options.high_fraction}) {
      const double level = fraction * a_max;
      for (std::size_t i = 0; i + 1 < branch->size(); ++i) {
        const SweepPoint& from = (*branch)[i];
        const SweepPoint& to = (*branch)[i + 1];
        const bool below_from = from.amplitude[c] < level;
        if (below_from == (to.amplitude[c] < level)) continue;
        // Bisect in the sweep direction, always warm-starting from `from`.
        SweepPoint a = from, b = to;
        while (std::abs(b.parameter - a.parameter) > options.resolution) {
          const double pm = 0.5 * (a.parameter + b.parameter);
          SweepPoint mid = sweep_point(model, parameter, pm, a.final_state, options.sweep);
          if ((mid.amplitude[c] < level) == below_from) {
            a = std::move(mid);
          } else {
            b = std::move(mid);
          }
        }
        win_lo = std::min({win_lo, a.parameter, b.parameter});
        win_hi = std::max({win_hi, a.parameter, b.parameter});
        small = std::min({small, a.amplitude[c], b.amplitude[c]});
        large = std::max({large, a.amplitude[c], b.amplitude[c]});
      }
    }
  }
  if (!std::isfinite(win_lo)) throw NotApplicable("canard_window: amplitude never crosses the thresholds");
  // Amplitudes at the window edges bound the jump from both sides.
  for (const auto* branch : {&out.sweep.forward, &out.sweep.backward}) {
    for (const auto& sp : *branch) {
      if (sp.parameter < win_lo || sp.parameter > win_hi) {
        large = std::max(large, sp.amplitude[c]);
      }
    }
  }
  out.window.kind = BifurcationKind::kCanardInterval;
  out.window.parameter_name = parameter;
  out.window.interval_lower = win_lo;
  out.window.interval_upper = win_hi;
  out.window.parameter_value = 0.5 * (win_lo + win_hi);
  out.small_amplitude = small;
  out.large_amplitude = large;
  out.jump_ratio = large / std::max(small, 1e-300);
  return out;
}

RegimeMap classify_regimes(const MeanFieldModel& model, const std::string& x_name,
                           const std::vector<double>& x_values, const std::string& y_name,
                           const std::vector<double>& y_values, const RegimeOptions& options) {
  require(!x_values.empty(), "classify_regimes: empty parameter grid");
  for (double v : x_values) require(std::isfinite(v), "classify_regimes: grid must be finite");
  for (double v : y_values) require(std::isfinite(v), "classify_regimes: grid must be finite");
  RegimeMap map;
  map.x_name = x_name;
  map.y_name = y_name;
  map.x_values = x_values;
  map.y_values = y_name.empty() ? std::vector<double>{0.0} : y_values;
  const std::size_t nx = map.x_values.size(), ny = map.y_values.size();
  map.cells.resize(nx * ny);
  const std::size_t coord = options.measure.period_coordinate;

  parallel_for(nx * ny, [&](std::size_t index) {
    const std::size_t ix = index % nx, iy = index / nx;
    MeanFieldModel m = with_parameter(model, x_name, map.x_values[ix]);
    if (!y_name.empty()) set_parameter(m, y_name, map.y_values[iy]);
    const SearchBox box = options.box ? *options.box : default_box(m);
    const auto points = find_fixed_points(m, box, options.fixed_point_density);

    std::vector<std::vector<double>> probes;
    const std::size_t n = m.dimension();
    const int per_axis = std::max(1, options.probes_per_axis);
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) total *= static_cast<std::size_t>(per_axis);
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<double> probe(n);
      std::size_t rest = k;
      for (std::size_t d = 0; d < n; ++d) {
        const auto cell = rest % static_cast<std::size_t>(per_axis);
        rest /= static_cast<std::size_t>(per_axis);
        probe[d] = box.lower[d] + (static_cast<double>(cell) + 0.5) / per_axis * (box.upper[d] - box.lower[d]);
      }
      probes.push_back(std::move(probe));
    }
    RegimeCell cell;
    cell.x = map.x_values[ix];
    cell.y = map.y_values[iy];
    for (const auto& p : points) {
      if (p.stable()) ++cell.stable_fixed_points;
      if (!p.stable()) probes.push_back(kicked(p.location, 1e-3));
    }
    bool cycle = false;
    for (const auto& probe : probes) {
      const auto meas = measure_attractor(m, probe, options.measure);
      if (meas.amplitude[coord] > options.cycle_threshold) {
        cycle = true;
        if (meas.amplitude[coord] > cell.cycle_amplitude) {
          cell.cycle_amplitude = meas.amplitude[coord];
          cell.cycle_period = meas.period;
        }
      }
    }
    if (cell.stable_fixed_points > 0) {
      cell.regime = cycle ? Regime::kBistable : Regime::kStationary;
    } else {
      cell.regime = Regime::kOscillatory;
    }
    map.cells[index] = cell;
  });
  return map;
}

}  // namespace mfnet
