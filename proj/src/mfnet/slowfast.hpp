#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "mfnet/meanfield.hpp"

namespace mfnet {

// epsilon = 0 limit of a wc3d model: u2 = F(u1, ze) on the critical manifold.
class ReducedSystem {
 public:
  explicit ReducedSystem(MeanFieldModel model);

  const MeanFieldModel& model() const { return model_; }
  const SigmoidSpec& fast_sigmoid() const { return fast_; }
  double k() const;
  double gamma() const;

 private:
  MeanFieldModel model_;
  SigmoidSpec fast_;
};

// Largest |u1| accepted by inverse-sigmoid evaluations.
inline constexpr double kManifoldLimit = 1.0 - 1e-9;

double constraint_F(double u1, double ze, const ReducedSystem& sys);
double dF_du1(double u1, const ReducedSystem& sys);
double d2F_du1(double u1, const ReducedSystem& sys);
double dF_dze(const ReducedSystem& sys);

// Roots of dF/du1 in (-1, 1), ascending.
std::vector<double> fold_line(const ReducedSystem& sys);

struct ReducedRhs {
  double du1_scaled = 0.0;  // (dF/du1) * du1/dt
  double dze = 0.0;
};

ReducedRhs reduced_rhs(double u1, double ze, const ReducedSystem& sys);

enum class SingularityKind { kFoldedSaddle, kFoldedNode, kFoldedFocus, kFsn2Candidate };

std::string to_string(SingularityKind kind);

struct FoldedSingularity {
  double u1 = 0.0;
  double ze = 0.0;
  double u2 = 0.0;
  int fold_branch = 0;  // -1 on F-, +1 on F+
  SingularityKind kind = SingularityKind::kFoldedSaddle;
  std::complex<double> eigenvalue_1;
  std::complex<double> eigenvalue_2;
  double fold_residual = 0.0;
  double flow_residual = 0.0;
};

// Jacobian of the desingularized field (du1_scaled, dF/du1 * dze) in (u1, ze).
Eigen::Matrix2d desingularized_jacobian(double u1, double ze, const ReducedSystem& sys);

std::vector<FoldedSingularity> folded_singularities(const ReducedSystem& sys);

struct Fsn2Point {
  double sigma1 = 0.0;
  double k = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double ze = 0.0;
  int fold_branch = 0;
  double fold_residual = 0.0;
  double flow_residual = 0.0;
  double equilibrium_residual = 0.0;
};

struct Fsn2Curve {
  std::vector<Fsn2Point> points;
  // sigma1 values where no solution with k in range was found
  std::vector<double> gaps;
};

// FSN II points solved per sigma1 at fixed gamma (taken from the model).
std::optional<Fsn2Point> fsn2_point(const ReducedSystem& sys, double fold_u1, int branch);
Fsn2Curve fsn2_locus(const MeanFieldModel& model, double k_lower, double k_upper,
                     const std::vector<double>& sigma1_values);

struct ManifoldSample {
  double u1 = 0.0;
  double ze = 0.0;
  double u2 = 0.0;
};

std::vector<ManifoldSample> sample_critical_manifold(const ReducedSystem& sys, std::size_t u1_points,
                                                     double ze_lower, double ze_upper, std::size_t ze_points);

}  // namespace mfnet
