#include "mfnet/slowfast.hpp"

#include <cmath>
#include <numbers>

#include "mfnet/errors.hpp"
#include "mfnet/parallel.hpp"

namespace mfnet {

namespace {

void check_domain(double u1) {
  if (!(std::abs(u1) <= kManifoldLimit)) {
    throw DomainError("u1 must lie in (-1, 1) for the critical manifold, got " + std::to_string(u1));
  }
}

double j(const ReducedSystem& sys, int a, int b) { return sys.model().coupling[a][b]; }

double rate(const ReducedSystem& sys) { return sys.model().adaptation->rate; }

double tau2(const ReducedSystem& sys) { return sys.model().time_constants[1]; }

// (G^-1)''(u) = 2 c^2 x / G'(x)^2 with x = G^-1(u).
double inverse_second_derivative(double u, const SigmoidSpec& spec) {
  const double x = effective_gain_inverse(u, spec);
  const double c = spec.effective_slope();
  const double gp = effective_gain_derivative(x, spec);
  return 2.0 * c * c * x / (gp * gp);
}

}  // namespace

ReducedSystem::ReducedSystem(MeanFieldModel model) : model_(std::move(model)) {
  model_.validate();
  if (model_.population_count() != 2 || !model_.adaptation) {
    throw InvalidArgument("reduced system requires a two-population model with adaptation");
  }
  if (model_.coupling[0][1] == 0.0) throw InvalidArgument("reduced system requires J12 != 0");
  const auto& w = model_.adaptation_weights;
  if (w[0] != 1.0 || w[1] != 0.0 || model_.inputs[0] != 0.0 || model_.inputs[1] != 0.0) {
    throw InvalidArgument("reduced system requires lambda = (1, 0) and zero inputs");
  }
  fast_ = model_.sigmoids[0];
}

double ReducedSystem::k() const { return model_.adaptation->offset; }
double ReducedSystem::gamma() const { return model_.adaptation->leak; }

double constraint_F(double u1, double ze, const ReducedSystem& sys) {
  check_domain(u1);
  return (effective_gain_inverse(u1, sys.fast_sigmoid()) - j(sys, 0, 0) * u1 - ze) / j(sys, 0, 1);
}

double dF_du1(double u1, const ReducedSystem& sys) {
  check_domain(u1);
  return (effective_gain_inverse_derivative(u1, sys.fast_sigmoid()) - j(sys, 0, 0)) / j(sys, 0, 1);
}

double d2F_du1(double u1, const ReducedSystem& sys) {
  check_domain(u1);
  return inverse_second_derivative(u1, sys.fast_sigmoid()) / j(sys, 0, 1);
}

double dF_dze(const ReducedSystem& sys) { return -1.0 / j(sys, 0, 1); }

std::vector<double> fold_line(const ReducedSystem& sys) {
  constexpr int kGrid = 10000;
  std::vector<double> roots;
  auto at = [&](int i) { return -kManifoldLimit + 2.0 * kManifoldLimit * i / kGrid; };
  double prev_u = at(0);
  double prev_f = dF_du1(prev_u, sys);
  for (int i = 1; i <= kGrid; ++i) {
    const double u = at(i);
    const double f = dF_du1(u, sys);
    if (f == 0.0) {
      roots.push_back(u);
    } else if (prev_f != 0.0 && std::signbit(f) != std::signbit(prev_f)) {
      double a = prev_u, b = u, fa = prev_f;
      while (b - a > 1e-12) {
        const double m = 0.5 * (a + b);
        const double fm = dF_du1(m, sys);
        if (std::signbit(fm) == std::signbit(fa)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_u = u;
    prev_f = f;
  }
  return roots;
}

ReducedRhs reduced_rhs(double u1, double ze, const ReducedSystem& sys) {
  const double f = constraint_F(u1, ze, sys);
  const double drive2 = j(sys, 1, 0) * u1 + j(sys, 1, 1) * f;
  ReducedRhs out;
  out.dze = rate(sys) * (sys.k() + sys.gamma() * ze - u1 - f);
  out.du1_scaled = (-f + effective_gain(drive2, sys.model().sigmoids[1])) / tau2(sys) - dF_dze(sys) * out.dze;
  return out;
}

Eigen::Matrix2d desingularized_jacobian(double u1, double ze, const ReducedSystem& sys) {
  const double a = dF_du1(u1, sys);
  const double da = d2F_du1(u1, sys);
  const double b = dF_dze(sys);
  const double f = constraint_F(u1, ze, sys);
  const double g2p = effective_gain_derivative(j(sys, 1, 0) * u1 + j(sys, 1, 1) * f, sys.model().sigmoids[1]);
  const double r = rate(sys);
  const double d = r * (sys.k() + sys.gamma() * ze - u1 - f);
  Eigen::Matrix2d m;
  m(0, 0) = (-a + g2p * (j(sys, 1, 0) + j(sys, 1, 1) * a)) / tau2(sys) - b * r * (-1.0 - a);
  m(0, 1) = (-b + g2p * j(sys, 1, 1) * b) / tau2(sys) - b * r * (sys.gamma() - b);
  m(1, 0) = da * d + a * r * (-1.0 - a);
  m(1, 1) = a * r * (sys.gamma() - b);
  return m;
}

std::string to_string(SingularityKind kind) {
  switch (kind) {
    case SingularityKind::kFoldedSaddle: return "folded-saddle";
    case SingularityKind::kFoldedNode: return "folded-node";
    case SingularityKind::kFoldedFocus: return "folded-focus";
    case SingularityKind::kFsn2Candidate: return "fsn2-candidate";
  }
  return "unknown";
}

std::vector<FoldedSingularity> folded_singularities(const ReducedSystem& sys) {
  const auto folds = fold_line(sys);
  if (folds.empty()) throw NotApplicable("folded_singularities: the critical manifold has no fold");
  std::vector<FoldedSingularity> out;
  // Parametrize by u2 = F, which is affine in ze and bounded in practice.
  constexpr int kGrid = 4000;
  constexpr double kU2Extent = 3.0;
  for (double u1 : folds) {
    const double base = effective_gain_inverse(u1, sys.fast_sigmoid()) - j(sys, 0, 0) * u1;
    auto ze_of = [&](double u2) { return base - j(sys, 0, 1) * u2; };
    auto n_of = [&](double u2) { return reduced_rhs(u1, ze_of(u2), sys).du1_scaled; };
    double prev_v = -kU2Extent;
    double prev_n = n_of(prev_v);
    for (int i = 1; i <= kGrid; ++i) {
      const double v = -kU2Extent + 2.0 * kU2Extent * i / kGrid;
      const double n = n_of(v);
      if (std::signbit(n) != std::signbit(prev_n)) {
        double a = prev_v, b = v, fa = prev_n;
        for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
          const double m = 0.5 * (a + b);
          const double fm = n_of(m);
          if (std::signbit(fm) == std::signbit(fa)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        double u2 = 0.5 * (a + b);
        double ze = ze_of(u2);
        // Newton polish in ze.
        for (int it = 0; it < 5; ++it) {
          const double r = reduced_rhs(u1, ze, sys).du1_scaled;
          const double slope = desingularized_jacobian(u1, ze, sys)(0, 1);
          if (slope == 0.0 || std::abs(r) < 1e-15) break;
          const double next = ze - r / slope;
          if (std::abs(reduced_rhs(u1, next, sys).du1_scaled) >= std::abs(r)) break;
          ze = next;
        }
        FoldedSingularity s;
        s.u1 = u1;
        s.ze = ze;
        s.u2 = constraint_F(u1, ze, sys);
        s.fold_branch = u1 < 0 ? -1 : 1;
        s.fold_residual = std::abs(dF_du1(u1, sys));
        s.flow_residual = std::abs(reduced_rhs(u1, ze, sys).du1_scaled);
        Eigen::EigenSolver<Eigen::Matrix2d> es(desingularized_jacobian(u1, ze, sys), false);
        s.eigenvalue_1 = es.eigenvalues()[0];
        s.eigenvalue_2 = es.eigenvalues()[1];
        const double scale = std::max(1.0, std::max(std::abs(s.eigenvalue_1), std::abs(s.eigenvalue_2)));
        if (std::abs(s.eigenvalue_1) < 1e-6 * scale || std::abs(s.eigenvalue_2) < 1e-6 * scale) {
          s.kind = SingularityKind::kFsn2Candidate;
        } else if (std::abs(s.eigenvalue_1.imag()) > 1e-12 * scale) {
          s.kind = SingularityKind::kFoldedFocus;
        } else if (std::signbit(s.eigenvalue_1.real()) == std::signbit(s.eigenvalue_2.real())) {
          s.kind = SingularityKind::kFoldedNode;
        } else {
          s.kind = SingularityKind::kFoldedSaddle;
        }
        out.push_back(s);
      }
      prev_v = v;
      prev_n = n;
    }
  }
  return out;
}

std::optional<Fsn2Point> fsn2_point(const ReducedSystem& sys, double fold_u1, int branch) {
  const SigmoidSpec& s2 = sys.model().sigmoids[1];
  const double j21 = j(sys, 1, 0), j22 = j(sys, 1, 1);
  // Initial guess: u2 on the slow nullcline above the fold point.
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    if (m - effective_gain(j21 * fold_u1 + j22 * m, s2) < 0.0) {
      lo = m;
    } else {
      hi = m;
    }
  }
  const double u2_guess = 0.5 * (lo + hi);
  const double base = effective_gain_inverse(fold_u1, sys.fast_sigmoid()) - j(sys, 0, 0) * fold_u1;
  double ze = base - j(sys, 0, 1) * u2_guess;
  double k = fold_u1 + u2_guess - sys.gamma() * ze;

  MeanFieldModel m = sys.model();
  auto residuals = [&](double z, double kk) {
    m.adaptation->offset = kk;
    const ReducedSystem rs(m);
    const auto r = reduced_rhs(fold_u1, z, rs);
    return std::pair{r.du1_scaled, r.dze};
  };
  auto [rn, rd] = residuals(ze, k);
  for (int it = 0; it < 50 && std::max(std::abs(rn), std::abs(rd)) > 1e-14; ++it) {
    m.adaptation->offset = k;
    const ReducedSystem rs(m);
    const Eigen::Matrix2d dj = desingularized_jacobian(fold_u1, ze, rs);
    const double b = dF_dze(rs);
    const double r = rate(rs);
    Eigen::Matrix2d jac;
    jac << dj(0, 1), -b * r, r * (rs.gamma() - b), r;
    const Eigen::Vector2d step = jac.fullPivLu().solve(Eigen::Vector2d(-rn, -rd));
    if (!step.allFinite()) return std::nullopt;
    ze += step(0);
    k += step(1);
    std::tie(rn, rd) = residuals(ze, k);
  }
  if (!(std::max(std::abs(rn), std::abs(rd)) < 1e-8)) return std::nullopt;
  m.adaptation->offset = k;
  const ReducedSystem rs(m);
  Fsn2Point p;
  p.sigma1 = rs.fast_sigmoid().noise_sd;
  p.k = k;
  p.u1 = fold_u1;
  p.ze = ze;
  p.u2 = constraint_F(fold_u1, ze, rs);
  p.fold_branch = branch;
  p.fold_residual = std::abs(dF_du1(fold_u1, rs));
  p.flow_residual = std::abs(rn);
  p.equilibrium_residual = std::abs(rd);
  return p;
}

Fsn2Curve fsn2_locus(const MeanFieldModel& model, double k_lower, double k_upper,
                     const std::vector<double>& sigma1_values) {
  require(std::isfinite(k_lower) && std::isfinite(k_upper) && k_lower <= k_upper,
          "fsn2_locus: k range must be bounded");
  for (double s : sigma1_values) require(std::isfinite(s) && s >= 0.0, "fsn2_locus: sigma1 values must be finite and >= 0");
  std::vector<std::vector<Fsn2Point>> columns(sigma1_values.size());
  parallel_for(sigma1_values.size(), [&](std::size_t i) {
    const ReducedSystem sys(with_parameter(model, "sigma1", sigma1_values[i]));
    for (double u1 : fold_line(sys)) {
      auto p = fsn2_point(sys, u1, u1 < 0 ? -1 : 1);
      if (p && p->k >= k_lower && p->k <= k_upper) columns[i].push_back(*p);
    }
  });
  Fsn2Curve curve;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].empty()) curve.gaps.push_back(sigma1_values[i]);
    for (auto& p : columns[i]) curve.points.push_back(p);
  }
  return curve;
}

std::vector<ManifoldSample> sample_critical_manifold(const ReducedSystem& sys, std::size_t u1_points,
                                                     double ze_lower, double ze_upper, std::size_t ze_points) {
  require(u1_points >= 2 && ze_points >= 2, "critical manifold sampler needs at least 2 points per axis");
  require(ze_lower < ze_upper, "critical manifold sampler: empty ze range");
  std::vector<ManifoldSample> out;
  out.reserve(u1_points * ze_points);
  constexpr double kEdge = 0.999;
  for (std::size_t i = 0; i < u1_points; ++i) {
    const double u1 = -kEdge + 2.0 * kEdge * static_cast<double>(i) / static_cast<double>(u1_points - 1);
    for (std::size_t q = 0; q < ze_points; ++q) {
      const double ze = ze_lower + (ze_upper - ze_lower) * static_cast<double>(q) / static_cast<double>(ze_points - 1);
      out.push_back({u1, ze, constraint_F(u1, ze, sys)});
    }
  }
  return out;
}

}  // namespace mfnet
