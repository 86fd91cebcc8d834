#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mfnet/types.hpp"

namespace mfnet {

struct RecordingPlan {
  std::size_t record_every = 10;  // steps between recorded rows
  std::size_t sampled_neurons = 10;
  // Explicit global indices; overrides sampled_neurons when non-empty.
  std::vector<std::size_t> sample_indices;
  bool full = false;  // record every neuron
};

struct NetworkState {
  std::vector<double> activities;  // block-ordered by population
  std::vector<double> adaptation;  // one entry per neuron, all equal; empty without adaptation
  std::vector<double> ou_values;
  double time = 0.0;
};

// Euler drift with exact OU noise substeps; population means feed the next
// step. Results are bit-identical for any thread count.
TrajectoryRecord simulate_wc_network(const NetworkConfig& config, const RecordingPlan& plan = {},
                                     NetworkState* final_state = nullptr);
TrajectoryRecord simulate_adaptation_network(const NetworkConfig& config, const RecordingPlan& plan = {},
                                             NetworkState* final_state = nullptr);
// Dispatches on the presence of an adaptation block.
TrajectoryRecord simulate_network(const NetworkConfig& config, const RecordingPlan& plan = {},
                                  NetworkState* final_state = nullptr);

std::vector<double> empirical_mean(const NetworkState& state, const NetworkConfig& config);

// Pearson correlation over time of activities centered by their population mean.
std::vector<double> pairwise_correlation(const TrajectoryRecord& record,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

}  // namespace mfnet
