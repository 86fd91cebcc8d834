#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfnet/sigmoid.hpp"
#include "mfnet/types.hpp"

namespace mfnet {

enum class ModelKind { kGeneral, kWc2d, kWc3d };

std::string to_string(ModelKind kind);

// dU/dt = rate * (offset + leak * U - sum_a mu_a), entering population a with
// weight adaptation_weights[a].
struct SlowAdaptation {
  double rate = 1.0;
  double offset = 0.0;  // k
  double leak = 0.0;    // gamma
};

// Moment equations of the network mean-field limit:
//   tau_a dmu_a/dt = -mu_a + G_a(sum_b J_ab mu_b + lambda_a U + I_a).
// The state is (mu_1..mu_P) or (mu_1..mu_P, U) when adaptation is present.
struct MeanFieldModel {
  ModelKind kind = ModelKind::kGeneral;
  std::vector<std::vector<double>> coupling;
  std::vector<SigmoidSpec> sigmoids;
  std::vector<double> time_constants;
  std::vector<double> inputs;
  std::vector<double> adaptation_weights;
  double epsilon = 1.0;  // timescale ratio; equals time_constants[0] for wc2d/wc3d
  std::optional<SlowAdaptation> adaptation;

  std::size_t population_count() const { return time_constants.size(); }
  std::size_t dimension() const { return population_count() + (adaptation ? 1 : 0); }
  void validate() const;
};

struct Wc2dParams {
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  double g1 = 1, g2 = 1;
  double sigma1 = 0, sigma2 = 0;
  double ze = 0;
  double epsilon = 0.05;
};

struct Wc3dParams {
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  double g1 = 1, g2 = 1;
  double sigma1 = 0, sigma2 = 0;
  double k = 0;
  double gamma = 0;
  double epsilon = 0.005;
};

// Two populations, tau = (epsilon, 1), input (ze, 0).
MeanFieldModel make_wc2d(const Wc2dParams& p);
// wc2d with ze promoted to a state variable: lambda = (1, 0), inputs zero, rate 1.
MeanFieldModel make_wc3d(const Wc3dParams& p);
// Limit system of a network configuration (noise sd taken from each sigmoid).
MeanFieldModel meanfield_of(const NetworkConfig& config);

// Named scalar parameters: epsilon, k, gamma, rate, ze (wc2d input 1),
// sigmaA, gA, IA, tauA, lambdaA, JAB with 1-based population indices.
double get_parameter(const MeanFieldModel& model, const std::string& name);
void set_parameter(MeanFieldModel& model, const std::string& name, double value);
MeanFieldModel with_parameter(MeanFieldModel model, const std::string& name, double value);

void rhs(const MeanFieldModel& model, std::span<const double> state, std::span<double> out);
std::vector<double> rhs(const MeanFieldModel& model, std::span<const double> state, double t = 0.0);
Eigen::MatrixXd jacobian(const MeanFieldModel& model, std::span<const double> state);

struct Tolerances {
  double abs = 1e-9;
  double rel = 1e-9;
};

struct SolverStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rhs_evaluations = 0;
};

struct OdeSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  SolverStats stats;

  const std::vector<double>& final_state() const { return states.back(); }
  std::vector<double> component(std::size_t index) const;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeOptions {
  Tolerances tolerances;
  // Spacing of the dense-output grid; <= 0 records only the endpoints.
  double output_dt = 0.0;
  double min_step = 1e-12;
  double max_step = 0.0;  // 0 = unbounded
  std::uint64_t max_steps = 50'000'000;
};

// Dormand-Prince 5(4) with cubic Hermite dense output on a uniform grid
// t0, t0 + output_dt, ... , t0 + horizon. Throws StiffnessError if the step
// size falls below min_step and IntegrationFault on non-finite states.
OdeSolution integrate_ode(const OdeRhs& f, std::vector<double> initial, double t0, double horizon,
                          const OdeOptions& options);

OdeSolution integrate(const MeanFieldModel& model, std::vector<double> initial, double horizon,
                      const Tolerances& tolerances, double output_dt = 0.0);

}  // namespace mfnet
