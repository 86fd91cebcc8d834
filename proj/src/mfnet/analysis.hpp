#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfnet/bifurcation.hpp"
#include "mfnet/meanfield.hpp"
#include "mfnet/network.hpp"
#include "mfnet/types.hpp"

namespace mfnet {

struct MmoBlock {
  int large = 0;
  int small = 0;
};

struct MmoSignature {
  std::vector<MmoBlock> blocks;
  double large_amp = 0.0;
  double small_amp = 0.0;

  bool empty() const { return blocks.empty(); }
  // True when every block equals the first one.
  bool uniform() const;
  bool has_large_and_small() const;
  // "L^s" per block, separated by spaces; identical consecutive blocks are
  // written once when the whole signature is uniform.
  std::string notation() const;
};

struct MmoOptions {
  // Absolute thresholds; non-positive values select the defaults.
  double large_amp = 0.0;
  double small_amp = 0.0;
  double large_fraction = 0.5;   // of the detrended global peak-to-trough
  double small_fraction = 0.02;
};

// Oscillation = confirmed maximum followed by the next confirmed minimum;
// extrema are confirmed once the trace retreats by small_amp. Leading small
// oscillations and the final (possibly truncated) block are dropped.
MmoSignature classify_mmo(const std::vector<double>& times, const std::vector<double>& values,
                          const MmoOptions& options = {});

struct SwitchStatistics {
  double residence_fraction_stationary = 0.0;
  std::size_t switch_count = 0;
  std::vector<double> switch_times;
  std::size_t near_samples = 0;
  std::size_t far_samples = 0;
};

// Near while within radius of fixed_point; leaves only beyond 1.2 radius.
// Every sample is counted exactly once as near or far.
SwitchStatistics residence_statistics(const std::vector<double>& times,
                                      const std::vector<std::vector<double>>& states,
                                      const std::vector<double>& fixed_point, double radius);

// Half the distance from fixed_point to the closest sample of `cycle`.
double default_residence_radius(const std::vector<double>& fixed_point,
                                const std::vector<std::vector<double>>& cycle);

struct JumpLevels {
  double arm = 0.0;    // must drop below before an onset counts
  double onset = 0.0;  // upward crossing time defines the onset
};

// Levels at 25% and 50% of the range of `reference`.
JumpLevels jump_levels(const std::vector<double>& reference);

// Interpolated upward crossings of levels.onset, each preceded by a visit
// below levels.arm.
std::vector<double> jump_onsets(const std::vector<double>& times, const std::vector<double>& values,
                                const JumpLevels& levels);

struct EarlyJumpEpoch {
  double meanfield_onset = 0.0;
  double network_onset = 0.0;
  double lead_time = 0.0;  // meanfield_onset - network_onset
};

struct EarlyJumpReport {
  std::vector<EarlyJumpEpoch> epochs;
  std::size_t unmatched = 0;  // mean-field onsets without a network onset in their window
  double median_lead = 0.0;
  double mean_lead = 0.0;
};

// Epochs are the mean-field onsets; each is matched to the closest network
// onset within half the adjacent mean-field inter-onset intervals. Throws
// NotApplicable when the mean-field trace has no large oscillation.
EarlyJumpReport detect_early_jump(const std::vector<double>& network_times,
                                  const std::vector<double>& network_values,
                                  const std::vector<double>& meanfield_times,
                                  const std::vector<double>& meanfield_values,
                                  std::optional<JumpLevels> levels = std::nullopt);

struct EarlyJumpOptions {
  std::size_t population = 0;
  double transient = 20.0;
  Tolerances tolerances{1e-9, 1e-9};
};

// Simulates the adaptation network, then for every network onset restarts
// the limit system from the network's (means, U) at that time and compares
// the next onset of both. Leads are accumulated over the whole run.
EarlyJumpReport early_jump_experiment(const NetworkConfig& config, const EarlyJumpOptions& options = {});

struct ConvergenceReport {
  std::vector<int> sizes;
  std::vector<double> errors;          // mean over seeds
  std::vector<std::vector<double>> per_seed;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  bool fit_skipped = false;
};

struct ConvergenceOptions {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t record_every = 10;
  Tolerances tolerances{1e-10, 1e-10};
  bool check_regime = true;
  RegimeOptions regime;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares y = intercept + slope x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Sup over recorded times and populations of |network mean - limit solution|,
// the limit started from the network's own initial means.
double meanfield_distance(const NetworkConfig& config, const TrajectoryRecord& record,
                          const Tolerances& tolerances);

// Every population of `base` is resized to each N in `sizes`. Throws
// BistableRegime when the limit system has coexisting attractors.
ConvergenceReport convergence_experiment(const NetworkConfig& base, const std::vector<int>& sizes,
                                         const ConvergenceOptions& options = {});

}  // namespace mfnet
