#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfnet/sigmoid.hpp"

namespace mfnet {

struct PopulationSpec {
  int size = 1;
  double time_constant = 1.0;
  double input = 0.0;
  SigmoidSpec sigmoid;
  double ou_relaxation_time = 1.0;
  double adaptation_weight = 0.0;
  // Initial activities are drawn uniformly in initial_mean +- initial_spread.
  double initial_mean = 0.0;
  double initial_spread = 0.0;
};

// Slow modulation current dU/dt = rate * (offset + leak * U - sum of population means).
struct AdaptationSpec {
  double rate = 1.0;
  double offset = 0.0;  // k
  double leak = 0.0;    // gamma
  double initial = 0.0;
};

struct NetworkConfig {
  std::vector<PopulationSpec> populations;
  std::vector<std::vector<double>> coupling;  // P x P, row = target population
  std::optional<AdaptationSpec> adaptation;
  std::uint64_t seed = 0;
  double dt = 0.01;
  double horizon = 1.0;

  std::size_t population_count() const { return populations.size(); }
  std::size_t neuron_count() const;
  // Index of the first neuron of each population, plus the total at the end.
  std::vector<std::size_t> population_offsets() const;

  // Throws InvalidArgument on any broken invariant.
  void validate() const;
  // Human-readable notes for soft violations (dt not small against tau).
  std::vector<std::string> warnings() const;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::vector<double>> population_means;  // [time][population]
  std::vector<double> adaptation_trace;               // empty when absent
  std::vector<std::size_t> sampled_neurons;           // global neuron indices
  std::vector<std::size_t> sampled_populations;       // population of each sample
  std::vector<std::vector<double>> neuron_samples;    // [time][sample]
  std::uint64_t seed_used = 0;

  std::size_t size() const { return times.size(); }
  // Column `population` of population_means.
  std::vector<double> mean_series(std::size_t population) const;
  void check_consistent() const;
};

}  // namespace mfnet
