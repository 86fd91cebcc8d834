#include "mfnet/sigmoid.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mfnet/errors.hpp"

namespace mfnet {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// Single-precision accurate rational approximation (M. Giles, 2010).
double inverse_erf_guess(double y) {
  double w = -std::log((1.0 - y) * (1.0 + y));
  double p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  return p * y;
}

}  // namespace

void SigmoidSpec::validate() const {
  if (!(gain > 0.0) || !std::isfinite(gain)) {
    throw InvalidArgument("sigmoid gain must be positive, got " + std::to_string(gain));
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw InvalidArgument("sigmoid noise_sd must be non-negative, got " + std::to_string(noise_sd));
  }
}

double SigmoidSpec::effective_slope() const {
  // E[erf(a + bZ)] = erf(a / sqrt(1 + 2 b^2)) for standard normal Z.
  return gain / std::sqrt(1.0 + 2.0 * gain * gain * noise_sd * noise_sd);
}

double bare_sigmoid(double x, const SigmoidSpec& spec) { return std::erf(spec.gain * x); }

double effective_gain(double x, const SigmoidSpec& spec) {
  return std::erf(spec.effective_slope() * x);
}

double effective_gain_derivative(double x, const SigmoidSpec& spec) {
  const double c = spec.effective_slope();
  const double cx = c * x;
  return kTwoOverSqrtPi * c * std::exp(-cx * cx);
}

double inverse_erf(double y) {
  if (!(std::abs(y) < 1.0)) {
    throw DomainError("inverse_erf: argument outside (-1, 1): " + std::to_string(y));
  }
  if (y == 0.0) return 0.0;
  const double a = std::abs(y);
  double x = inverse_erf_guess(a);
  const double tail = 1.0 - a;  // exact for a >= 0.5
  for (int iter = 0; iter < 4; ++iter) {
    const double slope = kTwoOverSqrtPi * std::exp(-x * x);
    if (slope == 0.0) break;
    const double residual = a > 0.5 ? -(std::erfc(x) - tail) : std::erf(x) - a;
    const double step = residual / slope;
    x -= step;
    if (std::abs(step) <= 1e-16 * x) break;
  }
  return y < 0.0 ? -x : x;
}

double effective_gain_inverse(double y, const SigmoidSpec& spec) {
  if (!(std::abs(y) < 1.0)) {
    throw DomainError("effective_gain_inverse: value " + std::to_string(y) +
                      " left the sigmoid range (-1, 1)");
  }
  return inverse_erf(y) / spec.effective_slope();
}

double effective_gain_inverse_derivative(double y, const SigmoidSpec& spec) {
  return 1.0 / effective_gain_derivative(effective_gain_inverse(y, spec), spec);
}

MonteCarloEstimate mc_effective_gain(double x, const SigmoidSpec& spec, std::uint64_t samples,
                                     std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("mc_effective_gain: samples must be >= 1");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Welford accumulation keeps the variance stable at 1e6+ samples.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t n = 1; n <= samples; ++n) {
    const double xi = spec.noise_sd == 0.0 ? 0.0 : spec.noise_sd * normal(engine);
    const double value = std::erf(spec.gain * (x + xi));
    const double delta = value - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (value - mean);
  }
  MonteCarloEstimate out;
  out.estimate = mean;
  if (samples > 1) {
    const double n = static_cast<double>(samples);
    out.standard_error = std::sqrt(m2 / (n - 1.0) / n);
  }
  return out;
}

}  // namespace mfnet
