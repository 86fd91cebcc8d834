#include "mfnet/noise.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mfnet/errors.hpp"

namespace mfnet {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// Uniform on (0, 1], never 0 so the Box-Muller log is finite.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

void OuProcessSpec::validate() const {
  if (!(relaxation_time > 0.0) || !std::isfinite(relaxation_time)) {
    throw InvalidArgument("OU relaxation_time must be positive, got " +
                          std::to_string(relaxation_time));
  }
  if (!(stationary_sd >= 0.0) || !std::isfinite(stationary_sd)) {
    throw InvalidArgument("OU stationary_sd must be non-negative, got " +
                          std::to_string(stationary_sd));
  }
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

GaussianStream::GaussianStream(const RngStreamSpec& spec)
    : key_{static_cast<std::uint32_t>(spec.master_seed),
           static_cast<std::uint32_t>(spec.master_seed >> 32)},
      stream_id_(spec.stream_id) {}

double GaussianStream::next() {
  ++draws_;
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const auto bits = philox4x32({static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_id_),
                                static_cast<std::uint32_t>(stream_id_ >> 32)},
                               key_);
  ++block_;
  const double u1 = to_unit(bits[0], bits[1]);
  const double u2 = to_unit(bits[2], bits[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double ou_initial(const OuProcessSpec& spec, GaussianStream& stream) {
  const double eta = stream.next();
  return spec.stationary_sd * eta;
}

OuStepper::OuStepper(const OuProcessSpec& spec, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("ou_step: dt must be positive");
  decay = std::exp(-dt / spec.relaxation_time);
  // -expm1 keeps precision when dt << relaxation_time.
  kick = spec.stationary_sd * std::sqrt(-std::expm1(-2.0 * dt / spec.relaxation_time));
}

double ou_step(double x, double dt, const OuProcessSpec& spec, GaussianStream& stream) {
  const OuStepper stepper(spec, dt);
  return stepper.step(x, stream.next());
}

}  // namespace mfnet
