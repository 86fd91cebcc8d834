#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "mfnet/meanfield.hpp"

namespace mfnet {

enum class Stability { kStableNode, kStableFocus, kSaddle, kUnstableFocus, kUnstableNode, kCenterLike };

std::string to_string(Stability s);

struct FixedPoint {
  std::vector<double> location;
  std::vector<std::complex<double>> eigenvalues;
  Stability stability = Stability::kCenterLike;
  double residual = 0.0;

  bool stable() const { return stability == Stability::kStableNode || stability == Stability::kStableFocus; }
};

std::vector<std::complex<double>> eigenvalues_at(const MeanFieldModel& model, std::span<const double> state);
Stability classify_stability(const std::vector<std::complex<double>>& eigenvalues);

// Damped Newton on rhs = 0 from `guess`. Returns the converged point with
// residual below 1e-10, or nothing.
std::optional<FixedPoint> refine_fixed_point(const MeanFieldModel& model, std::vector<double> guess,
                                             int max_iterations = 60);

struct SearchBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Default box: [-1, 1] per population, plus [-adaptation_extent, +] for U.
SearchBox default_box(const MeanFieldModel& model, double adaptation_extent = 10.0);

// Newton seeded on a uniform grid of grid_density points per axis; points
// closer than 1e-6 are merged, keeping the smaller residual.
std::vector<FixedPoint> find_fixed_points(const MeanFieldModel& model, const SearchBox& box,
                                          int grid_density);

enum class BifurcationKind { kHopf, kFoldOfCycles, kCanardInterval };

std::string to_string(BifurcationKind kind);

struct BifurcationPoint {
  BifurcationKind kind = BifurcationKind::kHopf;
  std::string parameter_name;
  double parameter_value = 0.0;
  double interval_lower = 0.0;
  double interval_upper = 0.0;
  std::vector<double> state;
  double real_part = 0.0;
  double imag_part = 0.0;
};

struct HopfScanOptions {
  int steps = 400;
  double tolerance = 1e-8;          // on |Re lambda|
  double parameter_tolerance = 1e-6;
  // Branch to follow; defaults to the unique (or first) fixed point at the start.
  std::optional<std::vector<double>> seed;
  std::optional<SearchBox> box;
};

// Natural-parameter continuation of an equilibrium branch over [lower, upper]
// with Hopf detection on the real part of complex eigenvalue pairs. Throws
// BranchLost when the branch folds or Newton fails.
std::vector<BifurcationPoint> hopf_locus_1d(const MeanFieldModel& model, const std::string& parameter,
                                            double lower, double upper, const HopfScanOptions& options = {});

// Long-run behaviour of one trajectory.
struct AttractorMeasure {
  std::vector<double> final_state;
  std::vector<double> amplitude;  // peak-to-peak per coordinate over the window
  double period = 0.0;            // 0 when no oscillation was detected
  bool oscillating = false;
  bool converged = true;          // false when the amplitude was still decaying
};

struct MeasureOptions {
  double transient = 100.0;
  double measure_horizon = 50.0;
  double output_dt = 0.0;         // 0 = min time constant / 2
  std::size_t period_coordinate = 1;
  double amplitude_threshold = 1e-6;
  Tolerances tolerances{1e-9, 1e-9};
};

AttractorMeasure measure_attractor(const MeanFieldModel& model, std::vector<double> initial,
                                   const MeasureOptions& options);

// Mean spacing of local maxima of a uniformly sampled series, counting only
// maxima above mid-range; 0 when fewer than two are found.
double estimate_period(const std::vector<double>& times, const std::vector<double>& values);

struct SweepPoint {
  double parameter = 0.0;
  std::vector<double> amplitude;
  double period = 0.0;
  bool oscillating = false;
  bool flagged = false;  // measurement window did not converge
  std::vector<double> final_state;
};

struct SweepCurve {
  std::string parameter_name;
  std::vector<SweepPoint> forward;
  std::vector<SweepPoint> backward;  // ordered by decreasing parameter
};

struct SweepOptions {
  MeasureOptions measure;
  std::optional<std::vector<double>> initial;  // default: stable fixed point near the start
  double kick = 1e-4;                          // perturbation added to each warm start
};

// Warm-started sweeps lower -> upper and back. The amplitude coordinate used
// for the "jump" checks is options.measure.period_coordinate.
SweepCurve amplitude_sweep(const MeanFieldModel& model, const std::string& parameter, double lower,
                           double upper, double step, const SweepOptions& options = {});

// Locates the amplitude jump of a canard explosion: the smallest parameter
// interval containing, for both sweep directions, the crossings of
// `low_fraction` and `high_fraction` of the largest amplitude seen. Edges are
// refined by bisection to `resolution`.
struct CanardWindow {
  BifurcationPoint window;  // kind kCanardInterval
  double small_amplitude = 0.0;
  double large_amplitude = 0.0;
  double jump_ratio = 0.0;
  SweepCurve sweep;
};

struct CanardWindowOptions {
  SweepOptions sweep;
  double low_fraction = 0.05;
  double high_fraction = 0.5;
  double resolution = 1e-6;
};

CanardWindow canard_window(const MeanFieldModel& model, const std::string& parameter, double lower,
                           double upper, double step, const CanardWindowOptions& options = {});

enum class Regime { kStationary, kBistable, kOscillatory };

std::string to_string(Regime r);

struct RegimeCell {
  double x = 0.0;
  double y = 0.0;
  Regime regime = Regime::kStationary;
  int stable_fixed_points = 0;
  double cycle_amplitude = 0.0;
  double cycle_period = 0.0;
};

struct RegimeMap {
  std::string x_name;
  std::string y_name;  // empty for a one-parameter map
  std::vector<double> x_values;
  std::vector<double> y_values;
  std::vector<RegimeCell> cells;  // row-major in (y, x)

  const RegimeCell& at(std::size_t ix, std::size_t iy = 0) const { return cells.at(iy * x_values.size() + ix); }
};

struct RegimeOptions {
  MeasureOptions measure;
  int fixed_point_density = 12;
  int probes_per_axis = 3;
  double cycle_threshold = 0.05;  // peak-to-peak above which an attractor counts as a cycle
  std::optional<SearchBox> box;
};

// Attractor census per cell: stable equilibria from Newton + eigenvalues, and
// cycles from trajectories started on a probe grid and near each equilibrium.
RegimeMap classify_regimes(const MeanFieldModel& model, const std::string& x_name,
                           const std::vector<double>& x_values, const std::string& y_name,
                           const std::vector<double>& y_values, const RegimeOptions& options = {});

std::vector<double> linspace_step(double lower, double upper, double step);

}  // namespace mfnet
