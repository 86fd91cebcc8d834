#include "mfnet/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfnet/errors.hpp"

namespace mfnet {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGeneral: return "general";
    case ModelKind::kWc2d: return "wc2d";
    case ModelKind::kWc3d: return "wc3d";
  }
  return "unknown";
}

void MeanFieldModel::validate() const {
  const std::size_t p = time_constants.size();
  require(p >= 1, "model needs at least one population");
  require(coupling.size() == p, "coupling must be P x P");
  for (const auto& row : coupling) require(row.size() == p, "coupling must be P x P");
  require(sigmoids.size() == p, "one sigmoid per population required");
  require(inputs.size() == p, "one input per population required");
  require(adaptation_weights.size() == p, "one adaptation weight per population required");
  for (double tau : time_constants) require(tau > 0.0, "time constants must be positive");
  for (const auto& s : sigmoids) s.validate();
  require(epsilon > 0.0, "epsilon must be positive");
  if (adaptation) require(adaptation->rate >= 0.0, "adaptation rate must be non-negative");
  if (kind == ModelKind::kWc2d) require(p == 2 && !adaptation, "wc2d is two populations, no adaptation");
  if (kind == ModelKind::kWc3d) require(p == 2 && adaptation, "wc3d is two populations with adaptation");
}

MeanFieldModel make_wc2d(const Wc2dParams& p) {
  MeanFieldModel m;
  m.kind = ModelKind::kWc2d;
  m.coupling = {{p.j11, p.j12}, {p.j21, p.j22}};
  m.sigmoids = {SigmoidSpec{p.g1, p.sigma1}, SigmoidSpec{p.g2, p.sigma2}};
  m.time_constants = {p.epsilon, 1.0};
  m.inputs = {p.ze, 0.0};
  m.adaptation_weights = {0.0, 0.0};
  m.epsilon = p.epsilon;
  m.validate();
  return m;
}

MeanFieldModel make_wc3d(const Wc3dParams& p) {
  MeanFieldModel m;
  m.kind = ModelKind::kWc3d;
  m.coupling = {{p.j11, p.j12}, {p.j21, p.j22}};
  m.sigmoids = {SigmoidSpec{p.g1, p.sigma1}, SigmoidSpec{p.g2, p.sigma2}};
  m.time_constants = {p.epsilon, 1.0};
  m.inputs = {0.0, 0.0};
  m.adaptation_weights = {1.0, 0.0};
  m.epsilon = p.epsilon;
  m.adaptation = SlowAdaptation{1.0, p.k, p.gamma};
  m.validate();
  return m;
}

MeanFieldModel meanfield_of(const NetworkConfig& config) {
  config.validate();
  MeanFieldModel m;
  m.kind = ModelKind::kGeneral;
  m.coupling = config.coupling;
  for (const auto& pop : config.populations) {
    m.sigmoids.push_back(pop.sigmoid);
    m.time_constants.push_back(pop.time_constant);
    m.inputs.push_back(pop.input);
    m.adaptation_weights.push_back(pop.adaptation_weight);
  }
  m.epsilon = *std::min_element(m.time_constants.begin(), m.time_constants.end());
  if (config.adaptation) {
    m.adaptation = SlowAdaptation{config.adaptation->rate, config.adaptation->offset,
                                  config.adaptation->leak};
  }
  // Two-population shapes are tagged so that epsilon and ze address tau1 and I1.
  if (m.population_count() == 2 && m.time_constants[1] == 1.0 && m.inputs[1] == 0.0) {
    const auto& w = m.adaptation_weights;
    if (!m.adaptation && w[0] == 0.0 && w[1] == 0.0) {
      m.kind = ModelKind::kWc2d;
      m.epsilon = m.time_constants[0];
    } else if (m.adaptation && w[0] == 1.0 && w[1] == 0.0 && m.inputs[0] == 0.0) {
      m.kind = ModelKind::kWc3d;
      m.epsilon = m.time_constants[0];
    }
  }
  m.validate();
  return m;
}

namespace {

// Parses "<letters><digits>" with 1-based population indices.
bool split_indexed(const std::string& name, const std::string& prefix, std::size_t digits,
                   std::size_t populations, std::vector<std::size_t>& idx) {
  if (name.size() != prefix.size() + digits || name.compare(0, prefix.size(), prefix) != 0) {
    return false;
  }
  idx.clear();
  for (std::size_t i = prefix.size(); i < name.size(); ++i) {
    const char c = name[i];
    if (c < '1' || c > '9') return false;
    const std::size_t v = static_cast<std::size_t>(c - '1');
    if (v >= populations) throw InvalidArgument("parameter index out of range: " + name);
    idx.push_back(v);
  }
  return true;
}

double* parameter_slot(MeanFieldModel& m, const std::string& name) {
  const std::size_t p = m.population_count();
  std::vector<std::size_t> idx;
  if (name == "epsilon") return &m.epsilon;
  if (name == "k" || name == "gamma" || name == "rate") {
    if (!m.adaptation) throw InvalidArgument("parameter '" + name + "' needs an adaptation model");
    if (name == "k") return &m.adaptation->offset;
    if (name == "gamma") return &m.adaptation->leak;
    return &m.adaptation->rate;
  }
  if (name == "ze") {
    if (m.kind == ModelKind::kWc3d) {
      throw InvalidArgument("ze is a state variable of the wc3d model, not a parameter");
    }
    return &m.inputs.at(0);
  }
  if (split_indexed(name, "sigma", 1, p, idx)) return &m.sigmoids[idx[0]].noise_sd;
  if (split_indexed(name, "g", 1, p, idx)) return &m.sigmoids[idx[0]].gain;
  if (split_indexed(name, "I", 1, p, idx)) return &m.inputs[idx[0]];
  if (split_indexed(name, "tau", 1, p, idx)) return &m.time_constants[idx[0]];
  if (split_indexed(name, "lambda", 1, p, idx)) return &m.adaptation_weights[idx[0]];
  if (split_indexed(name, "J", 2, p, idx)) return &m.coupling[idx[0]][idx[1]];
  throw InvalidArgument("unknown model parameter '" + name + "'");
}

}  // namespace

double get_parameter(const MeanFieldModel& model, const std::string& name) {
  return *parameter_slot(const_cast<MeanFieldModel&>(model), name);
}

void set_parameter(MeanFieldModel& model, const std::string& name, double value) {
  *parameter_slot(model, name) = value;
  // The timescale ratio is the fast time constant for the two-population kinds.
  if (model.kind != ModelKind::kGeneral) {
    if (name == "epsilon") model.time_constants[0] = value;
    if (name == "tau1") model.epsilon = value;
  }
}

MeanFieldModel with_parameter(MeanFieldModel model, const std::string& name, double value) {
  set_parameter(model, name, value);
  return model;
}

void rhs(const MeanFieldModel& model, std::span<const double> state, std::span<double> out) {
  const std::size_t p = model.population_count();
  if (state.size() != model.dimension() || out.size() != model.dimension()) {
    throw InvalidArgument("rhs: state dimension " + std::to_string(state.size()) +
                          " does not match model dimension " + std::to_string(model.dimension()));
  }
  const double u = model.adaptation ? state[p] : 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    double drive = 0.0;
    for (std::size_t b = 0; b < p; ++b) drive += model.coupling[a][b] * state[b];
    drive += model.adaptation_weights[a] * u + model.inputs[a];
    out[a] = (-state[a] + effective_gain(drive, model.sigmoids[a])) / model.time_constants[a];
  }
  if (model.adaptation) {
    double total = 0.0;
    for (std::size_t a = 0; a < p; ++a) total += state[a];
    const auto& ad = *model.adaptation;
    out[p] = ad.rate * (ad.offset + ad.leak * u - total);
  }
}

std::vector<double> rhs(const MeanFieldModel& model, std::span<const double> state, double) {
  std::vector<double> out(model.dimension());
  rhs(model, state, out);
  return out;
}

Eigen::MatrixXd jacobian(const MeanFieldModel& model, std::span<const double> state) {
  const std::size_t p = model.population_count();
  const std::size_t n = model.dimension();
  if (state.size() != n) throw InvalidArgument("jacobian: state dimension mismatch");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double u = model.adaptation ? state[p] : 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    double drive = 0.0;
    for (std::size_t b = 0; b < p; ++b) drive += model.coupling[a][b] * state[b];
    drive += model.adaptation_weights[a] * u + model.inputs[a];
    const double slope = effective_gain_derivative(drive, model.sigmoids[a]) / model.time_constants[a];
    const auto ia = static_cast<Eigen::Index>(a);
    for (std::size_t b = 0; b < p; ++b) {
      jac(ia, static_cast<Eigen::Index>(b)) = slope * model.coupling[a][b];
    }
    jac(ia, ia) -= 1.0 / model.time_constants[a];
    if (model.adaptation) jac(ia, static_cast<Eigen::Index>(p)) = slope * model.adaptation_weights[a];
  }
  if (model.adaptation) {
    const auto ip = static_cast<Eigen::Index>(p);
    for (std::size_t a = 0; a < p; ++a) jac(ip, static_cast<Eigen::Index>(a)) = -model.adaptation->rate;
    jac(ip, ip) = model.adaptation->rate * model.adaptation->leak;
  }
  return jac;
}

std::vector<double> OdeSolution::component(std::size_t index) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.at(index));
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

OdeSolution integrate_ode(const OdeRhs& f, std::vector<double> y, double t0, double horizon,
                          const OdeOptions& opt) {
  const auto& tol = opt.tolerances;
  if (!(tol.abs > 0.0) || !(tol.rel > 0.0)) throw InvalidArgument("integrate: tolerances must be positive");
  if (!(horizon >= 0.0)) throw InvalidArgument("integrate: horizon must be non-negative");
  if (!all_finite(y)) throw IntegrationFault("integrate: non-finite initial state", t0);

  const std::size_t n = y.size();
  OdeSolution sol;
  const double t_end = t0 + horizon;
  const double out_dt = opt.output_dt > 0.0 ? opt.output_dt : (horizon > 0.0 ? horizon : 1.0);
  const auto grid_count = static_cast<std::uint64_t>(std::floor(horizon / out_dt + 1e-9)) + 1;
  auto grid_time = [&](std::uint64_t i) { return i + 1 == grid_count && opt.output_dt <= 0.0 ? t_end : t0 + static_cast<double>(i) * out_dt; };
  sol.times.reserve(grid_count + 1);
  sol.states.reserve(grid_count + 1);
  sol.times.push_back(t0);
  sol.states.push_back(y);
  std::uint64_t next_grid = 1;
  if (horizon == 0.0) return sol;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  auto eval = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
    f(t, state, out);
    ++sol.stats.rhs_evaluations;
  };

  double t = t0;
  eval(t, y, k1);
  // Initial step from the scale of the derivative.
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = tol.abs + tol.rel * std::abs(y[i]);
    d0 = std::max(d0, std::abs(y[i]) / sc);
    d1 = std::max(d1, std::abs(k1[i]) / sc);
  }
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h = std::min(h, horizon);
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  std::uint64_t steps = 0;
  while (t < t_end) {
    if (++steps > opt.max_steps) throw StiffnessError("integrate: step budget exhausted", t);
    if (t + h > t_end) h = t_end - t;
    if (h < opt.min_step && t_end - t > opt.min_step) {
      std::ostringstream msg;
      msg << "integrate: step size underflow (h=" << h << ") at t=" << t << ", system too stiff";
      throw StiffnessError(msg.str(), t);
    }
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    eval(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    eval(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    eval(t + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    eval(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (!std::isfinite(err)) {
      h *= 0.1;
      ++sol.stats.rejected;
      continue;
    }
    if (err <= 1.0) {
      const double t_new = t + h;
      if (!all_finite(ynew)) throw IntegrationFault("integrate: non-finite state", t_new);
      // Cubic Hermite between (t, y, k1) and (t_new, ynew, k7).
      while (next_grid < grid_count && grid_time(next_grid) <= t_new + 1e-12 * std::max(1.0, std::abs(t_new))) {
        const double tg = std::min(grid_time(next_grid), t_new);
        const double s = (tg - t) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        std::vector<double> yg(n);
        for (std::size_t i = 0; i < n; ++i) {
          yg[i] = h00 * y[i] + h10 * h * k1[i] + h01 * ynew[i] + h11 * h * k7[i];
        }
        sol.times.push_back(tg);
        sol.states.push_back(std::move(yg));
        ++next_grid;
      }
      t = t_new;
      y.swap(ynew);
      k1.swap(k7);
      ++sol.stats.accepted;
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= factor;
    } else {
      ++sol.stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
  }
  // Guard against a missing endpoint from rounding of the grid.
  if (sol.times.back() < t_end - 1e-9 * std::max(1.0, std::abs(t_end)) && opt.output_dt <= 0.0) {
    sol.times.push_back(t_end);
    sol.states.push_back(y);
  }
  return sol;
}

OdeSolution integrate(const MeanFieldModel& model, std::vector<double> initial, double horizon,
                      const Tolerances& tolerances, double output_dt) {
  model.validate();
  if (initial.size() != model.dimension()) throw InvalidArgument("integrate: initial state dimension mismatch");
  OdeOptions opt;
  opt.tolerances = tolerances;
  opt.output_dt = output_dt;
  const OdeRhs f = [&model](double, std::span<const double> y, std::span<double> dy) { rhs(model, y, dy); };
  return integrate_ode(f, std::move(initial), 0.0, horizon, opt);
}

}  // namespace mfnet
