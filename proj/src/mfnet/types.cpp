#include "mfnet/types.hpp"

#include <cmath>
#include <sstream>

#include "mfnet/errors.hpp"

namespace mfnet {

std::size_t NetworkConfig::neuron_count() const { return population_offsets().back(); }

std::vector<std::size_t> NetworkConfig::population_offsets() const {
  std::vector<std::size_t> offsets(populations.size() + 1, 0);
  for (std::size_t a = 0; a < populations.size(); ++a) {
    offsets[a + 1] = offsets[a] + static_cast<std::size_t>(populations[a].size);
  }
  return offsets;
}

void NetworkConfig::validate() const {
  const std::size_t p = populations.size();
  require(p >= 1, "network needs at least one population");
  for (std::size_t a = 0; a < p; ++a) {
    const auto& pop = populations[a];
    const std::string where = "populations[" + std::to_string(a) + "]";
    require(pop.size >= 1, where + ".size must be >= 1");
    require(pop.time_constant > 0.0, where + ".time_constant must be positive");
    require(pop.ou_relaxation_time > 0.0, where + ".ou_relaxation_time must be positive");
    require(std::isfinite(pop.input), where + ".input must be finite");
    require(pop.initial_spread >= 0.0, where + ".initial_spread must be non-negative");
    pop.sigmoid.validate();
  }
  require(coupling.size() == p, "coupling must have one row per population");
  for (const auto& row : coupling) {
    require(row.size() == p, "coupling must be square (P x P)");
    for (double v : row) require(std::isfinite(v), "coupling entries must be finite");
  }
  if (adaptation) {
    require(adaptation->rate >= 0.0 && std::isfinite(adaptation->rate), "adaptation.rate must be >= 0");
    require(std::isfinite(adaptation->offset) && std::isfinite(adaptation->leak) &&
                std::isfinite(adaptation->initial),
            "adaptation parameters must be finite");
  }
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  require(std::isfinite(horizon) && horizon >= dt, "horizon must be >= dt");
}

std::vector<std::string> NetworkConfig::warnings() const {
  std::vector<std::string> out;
  for (std::size_t a = 0; a < populations.size(); ++a) {
    if (dt > populations[a].time_constant / 10.0) {
      std::ostringstream msg;
      msg << "dt=" << dt << " exceeds time_constant/10 of population " << a << " ("
          << populations[a].time_constant << ")";
      out.push_back(msg.str());
    }
  }
  return out;
}

std::vector<double> TrajectoryRecord::mean_series(std::size_t population) const {
  std::vector<double> out;
  out.reserve(population_means.size());
  for (const auto& row : population_means) out.push_back(row.at(population));
  return out;
}

void TrajectoryRecord::check_consistent() const {
  require(population_means.size() == times.size(), "population_means length mismatch");
  require(adaptation_trace.empty() || adaptation_trace.size() == times.size(),
          "adaptation_trace length mismatch");
  require(neuron_samples.empty() || neuron_samples.size() == times.size(),
          "neuron_samples length mismatch");
  require(sampled_populations.size() == sampled_neurons.size(), "sampled_populations length mismatch");
  for (const auto& row : neuron_samples) {
    require(row.size() == sampled_neurons.size(), "neuron_samples width mismatch");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    require(times[i] > times[i - 1], "times must be strictly increasing");
  }
  require(times.empty() || times.front() >= 0.0, "times must start at or after 0");
}

}  // namespace mfnet
