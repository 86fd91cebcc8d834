#pragma once

#include <cstdint>

namespace mfnet {

// Erf-shaped transfer function S(x) = erf(gain * x) driven by Gaussian input
// noise of standard deviation noise_sd.
struct SigmoidSpec {
  double gain = 1.0;
  double noise_sd = 0.0;

  // Throws InvalidArgument unless gain > 0 and noise_sd >= 0.
  void validate() const;

  // Slope factor of the noise-averaged sigmoid: gain / sqrt(1 + 2 gain^2 noise_sd^2).
  double effective_slope() const;
};

double bare_sigmoid(double x, const SigmoidSpec& spec);

// G(x) = E[erf(gain * (x + xi))] with xi ~ N(0, noise_sd^2), in closed form.
double effective_gain(double x, const SigmoidSpec& spec);

double effective_gain_derivative(double x, const SigmoidSpec& spec);

// Solves effective_gain(x) = y. Throws DomainError when |y| >= 1.
double effective_gain_inverse(double y, const SigmoidSpec& spec);

// d/dy of effective_gain_inverse, i.e. 1 / G'(G^{-1}(y)).
double effective_gain_inverse_derivative(double y, const SigmoidSpec& spec);

// Inverse error function on (-1, 1): rational initial guess polished by Newton
// steps (on erfc in the tails, where erf loses relative precision).
double inverse_erf(double y);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

// Sample mean of erf(gain * (x + xi)) over `samples` Gaussian draws. This is
// the independent check of effective_gain; it shares no code with it.
MonteCarloEstimate mc_effective_gain(double x, const SigmoidSpec& spec, std::uint64_t samples,
                                     std::uint64_t seed);

}  // namespace mfnet
