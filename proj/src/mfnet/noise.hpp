#pragma once

#include <array>
#include <cstdint>

namespace mfnet {

// Stationary Ornstein-Uhlenbeck input current.
struct OuProcessSpec {
  double relaxation_time = 1.0;
  double stationary_sd = 0.0;

  void validate() const;
};

// Identifies one independent random stream: master seed plus per-neuron id.
struct RngStreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

// Philox4x32-10 block: key = master seed, counter = (draw index, stream id).
// Pure function, so any draw of any stream is addressable without state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Standard normal draws from a counter-based stream. Each Philox block yields
// two normals through Box-Muller; the second one is cached.
class GaussianStream {
 public:
  GaussianStream() = default;
  explicit GaussianStream(const RngStreamSpec& spec);

  double next();
  std::uint64_t draws() const { return draws_; }

 private:
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_id_ = 0;
  std::uint64_t block_ = 0;
  std::uint64_t draws_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Draw from the stationary law N(0, stationary_sd^2).
double ou_initial(const OuProcessSpec& spec, GaussianStream& stream);

// Exact transition over dt: x e^{-dt/tau} + sd sqrt(1 - e^{-2 dt/tau}) eta.
double ou_step(double x, double dt, const OuProcessSpec& spec, GaussianStream& stream);

// Precomputed coefficients of ou_step for a fixed dt.
struct OuStepper {
  double decay = 1.0;
  double kick = 0.0;

  OuStepper() = default;
  OuStepper(const OuProcessSpec& spec, double dt);
  double step(double x, double eta) const { return decay * x + kick * eta; }
};

}  // namespace mfnet
