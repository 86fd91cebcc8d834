#include "mfnet/network.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <sstream>
#include <thread>

#include "mfnet/errors.hpp"
#include "mfnet/noise.hpp"
#include "mfnet/parallel.hpp"

namespace mfnet {

namespace {

constexpr std::size_t kBlockSize = 512;

struct Block {
  std::size_t begin;
  std::size_t end;
  std::size_t population;
};

// Fixed partition into population-aligned blocks; sums are reduced in this order.
std::vector<Block> make_blocks(const std::vector<std::size_t>& offsets) {
  std::vector<Block> blocks;
  for (std::size_t a = 0; a + 1 < offsets.size(); ++a) {
    for (std::size_t b = offsets[a]; b < offsets[a + 1]; b += kBlockSize) {
      blocks.push_back({b, std::min(b + kBlockSize, offsets[a + 1]), a});
    }
  }
  return blocks;
}

std::vector<double> blocked_means(const std::vector<double>& values, const std::vector<Block>& blocks,
                                  const std::vector<std::size_t>& offsets) {
  std::vector<double> sums(offsets.size() - 1, 0.0);
  for (const auto& blk : blocks) {
    double s = 0.0;
    for (std::size_t i = blk.begin; i < blk.end; ++i) s += values[i];
    sums[blk.population] += s;
  }
  for (std::size_t a = 0; a < sums.size(); ++a) sums[a] /= static_cast<double>(offsets[a + 1] - offsets[a]);
  return sums;
}

// Uniform on [0, 1) for the initial condition; a key distinct from the noise streams.
double initial_uniform(std::uint64_t seed, std::uint64_t index) {
  const auto bits = philox4x32({0u, 0u, static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)},
                               {static_cast<std::uint32_t>(seed) ^ 0xA511E9B3u,
                                static_cast<std::uint32_t>(seed >> 32) ^ 0x63D83595u});
  const std::uint64_t word = ((static_cast<std::uint64_t>(bits[0]) << 32) | bits[1]) >> 11;
  return static_cast<double>(word) * 0x1.0p-53;
}

std::vector<std::size_t> choose_samples(const NetworkConfig& config, const RecordingPlan& plan) {
  const std::size_t n = config.neuron_count();
  if (plan.full) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  if (!plan.sample_indices.empty()) {
    for (std::size_t i : plan.sample_indices) {
      require(i < n, "sample index " + std::to_string(i) + " out of range");
    }
    return plan.sample_indices;
  }
  const std::size_t count = std::min(plan.sampled_neurons, n);
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < count; ++s) out.push_back(s * n / count);
  return out;
}

TrajectoryRecord run(const NetworkConfig& config, const RecordingPlan& plan, NetworkState* final_state) {
  config.validate();
  require(plan.record_every >= 1, "record_every must be >= 1");
  const std::size_t n = config.neuron_count();
  const std::size_t pops = config.population_count();
  const auto offsets = config.population_offsets();
  const auto blocks = make_blocks(offsets);
  const double dt = config.dt;
  const auto steps = static_cast<std::uint64_t>(std::llround(config.horizon / dt));

  std::vector<double> x(n), xi(n);
  std::vector<GaussianStream> streams(n);
  std::vector<double> dt_over_tau(pops), gain(pops);
  std::vector<OuStepper> ou(pops);
  for (std::size_t a = 0; a < pops; ++a) {
    const auto& pop = config.populations[a];
    dt_over_tau[a] = dt / pop.time_constant;
    gain[a] = pop.sigmoid.gain;
    const OuProcessSpec spec{pop.ou_relaxation_time, pop.sigmoid.noise_sd};
    ou[a] = OuStepper(spec, dt);
    for (std::size_t i = offsets[a]; i < offsets[a + 1]; ++i) {
      streams[i] = GaussianStream({config.seed, i});
      x[i] = pop.initial_mean + pop.initial_spread * (2.0 * initial_uniform(config.seed, i) - 1.0);
      xi[i] = ou_initial(spec, streams[i]);
    }
  }
  const bool adapt = config.adaptation.has_value();
  const AdaptationSpec ad = adapt ? *config.adaptation : AdaptationSpec{};
  double u = adapt ? ad.initial : 0.0;

  TrajectoryRecord rec;
  rec.seed_used = config.seed;
  rec.sampled_neurons = choose_samples(config, plan);
  for (std::size_t i : rec.sampled_neurons) {
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), i);
    rec.sampled_populations.push_back(static_cast<std::size_t>(it - offsets.begin()) - 1);
  }
  const std::size_t rows = static_cast<std::size_t>(steps / plan.record_every) + 1;
  rec.times.reserve(rows);
  rec.population_means.reserve(rows);
  if (!rec.sampled_neurons.empty()) rec.neuron_samples.reserve(rows);

  std::vector<double> means = blocked_means(x, blocks, offsets);
  std::vector<double> drive(pops, 0.0);
  auto compute_drive = [&]() {
    for (std::size_t a = 0; a < pops; ++a) {
      double coupling_sum = 0.0;
      for (std::size_t b = 0; b < pops; ++b) coupling_sum += config.coupling[a][b] * means[b];
      const double extra = config.populations[a].adaptation_weight * u + config.populations[a].input;
      drive[a] = coupling_sum + extra;
    }
  };
  auto record_row = [&](double t) {
    rec.times.push_back(t);
    rec.population_means.push_back(means);
    if (adapt) rec.adaptation_trace.push_back(u);
    if (!rec.sampled_neurons.empty()) {
      std::vector<double> row;
      row.reserve(rec.sampled_neurons.size());
      for (std::size_t i : rec.sampled_neurons) row.push_back(x[i]);
      rec.neuron_samples.push_back(std::move(row));
    }
  };
  for (double m : means) {
    if (!std::isfinite(m)) throw IntegrationFault("network: non-finite initial state", 0.0);
  }
  record_row(0.0);
  compute_drive();

  std::vector<double> block_sums(blocks.size(), 0.0);
  std::uint64_t step = 0;
  bool fault = false;
  double fault_time = 0.0;
  std::atomic<bool> stop{steps == 0};

  auto completion = [&]() noexcept {
    ++step;
    const double t = static_cast<double>(step) * dt;
    if (adapt) {
      double total = 0.0;
      for (double m : means) total += m;
      u += dt * ad.rate * (ad.offset + ad.leak * u - total);
    }
    std::fill(means.begin(), means.end(), 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) means[blocks[b].population] += block_sums[b];
    bool finite = std::isfinite(u);
    for (std::size_t a = 0; a < pops; ++a) {
      means[a] /= static_cast<double>(offsets[a + 1] - offsets[a]);
      finite = finite && std::isfinite(means[a]);
    }
    if (!finite) {
      fault = true;
      fault_time = t;
      stop.store(true);
      return;
    }
    if (step % plan.record_every == 0) record_row(t);
    compute_drive();
    if (step >= steps) stop.store(true);
  };

  const unsigned workers = std::max<unsigned>(1, std::min<unsigned>(thread_count(), static_cast<unsigned>(blocks.size())));
  std::barrier sync(static_cast<std::ptrdiff_t>(workers), completion);
  auto worker = [&](unsigned id) {
    while (!stop.load()) {
      for (std::size_t b = id; b < blocks.size(); b += workers) {
        const Block& blk = blocks[b];
        const std::size_t a = blk.population;
        const double h = dt_over_tau[a], g = gain[a], d = drive[a];
        const OuStepper st = ou[a];
        const bool noisy = st.kick != 0.0;
        double sum = 0.0;
        for (std::size_t i = blk.begin; i < blk.end; ++i) {
          const double xn = x[i] + h * (-x[i] + std::erf(g * (d + xi[i])));
          xi[i] = noisy ? st.step(xi[i], streams[i].next()) : st.decay * xi[i];
          x[i] = xn;
          sum += xn;
        }
        block_sums[b] = sum;
      }
      sync.arrive_and_wait();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned id = 1; id < workers; ++id) pool.emplace_back(worker, id);
  worker(0);
  for (auto& th : pool) th.join();

  if (fault) {
    std::ostringstream msg;
    msg << "network: non-finite state at t=" << fault_time;
    throw IntegrationFault(msg.str(), fault_time);
  }
  if (steps % plan.record_every != 0) record_row(static_cast<double>(steps) * dt);
  if (final_state) {
    final_state->activities = x;
    final_state->ou_values = xi;
    final_state->adaptation = adapt ? std::vector<double>(n, u) : std::vector<double>{};
    final_state->time = static_cast<double>(steps) * dt;
  }
  return rec;
}

}  // namespace

TrajectoryRecord simulate_wc_network(const NetworkConfig& config, const RecordingPlan& plan, NetworkState* final_state) {
  if (config.adaptation) throw InvalidArgument("simulate_wc_network: config has an adaptation block");
  return run(config, plan, final_state);
}

TrajectoryRecord simulate_adaptation_network(const NetworkConfig& config, const RecordingPlan& plan,
                                             NetworkState* final_state) {
  if (!config.adaptation) throw InvalidArgument("simulate_adaptation_network: config has no adaptation block");
  return run(config, plan, final_state);
}

TrajectoryRecord simulate_network(const NetworkConfig& config, const RecordingPlan& plan, NetworkState* final_state) {
  return run(config, plan, final_state);
}

std::vector<double> empirical_mean(const NetworkState& state, const NetworkConfig& config) {
  const auto offsets = config.population_offsets();
  require(state.activities.size() == offsets.back(), "empirical_mean: state size does not match config");
  return blocked_means(state.activities, make_blocks(offsets), offsets);
}

std::vector<double> pairwise_correlation(const TrajectoryRecord& record,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t len = record.neuron_samples.size();
  require(len >= 3, "pairwise_correlation: need at least 3 recorded times");
  auto column = [&](std::size_t neuron) {
    const auto it = std::find(record.sampled_neurons.begin(), record.sampled_neurons.end(), neuron);
    require(it != record.sampled_neurons.end(),
            "pairwise_correlation: neuron " + std::to_string(neuron) + " was not sampled");
    const auto s = static_cast<std::size_t>(it - record.sampled_neurons.begin());
    const std::size_t pop = record.sampled_populations.at(s);
    std::vector<double> v(len);
    for (std::size_t t = 0; t < len; ++t) v[t] = record.neuron_samples[t][s] - record.population_means[t][pop];
    return v;
  };
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [i, jdx] : pairs) {
    const auto a = column(i);
    const auto b = column(jdx);
    if (i == jdx) {
      out.push_back(1.0);
      continue;
    }
    double ma = 0.0, mb = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      ma += a[t];
      mb += b[t];
    }
    ma /= static_cast<double>(len);
    mb /= static_cast<double>(len);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      sab += (a[t] - ma) * (b[t] - mb);
      saa += (a[t] - ma) * (a[t] - ma);
      sbb += (b[t] - mb) * (b[t] - mb);
    }
    out.push_back(saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0);
  }
  return out;
}

}  // namespace mfnet
