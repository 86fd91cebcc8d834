#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mfnet/errors.hpp"
#include "mfnet/meanfield.hpp"

using namespace mfnet;

namespace {

Wc2dParams canard2d() {
  Wc2dParams p;
  p.j11 = 4, p.j12 = -6.3, p.j21 = 0.85, p.j22 = -2.1;
  p.g1 = 1, p.g2 = 2.8, p.sigma1 = 1.4, p.ze = -0.2, p.epsilon = 0.05;
  return p;
}

Wc3dParams mmo3d() {
  Wc3dParams p;
  p.j11 = 5.08, p.j12 = -8, p.j21 = 0.85, p.j22 = -2.1;
  p.g1 = 4, p.g2 = 2.8, p.sigma1 = 2, p.k = -1.37, p.gamma = -0.8, p.epsilon = 0.005;
  return p;
}

MeanFieldModel three_populations() {
  MeanFieldModel m;
  m.coupling = {{1.0, -2.0, 0.5}, {0.7, -0.3, 0.0}, {-1.0, 0.4, 0.2}};
  m.sigmoids = {{1.0, 0.5}, {2.0, 0.0}, {0.5, 1.0}};
  m.time_constants = {0.5, 1.0, 2.0};
  m.inputs = {0.1, -0.2, 0.0};
  m.adaptation_weights = {1.0, 0.0, -0.5};
  m.adaptation = SlowAdaptation{0.3, 0.2, -0.4};
  return m;
}

// Reference right-hand side written out term by term.
std::vector<double> direct_rhs(const MeanFieldModel& m, const std::vector<double>& y) {
  const std::size_t p = m.population_count();
  std::vector<double> out(m.dimension());
  for (std::size_t a = 0; a < p; ++a) {
    double arg = m.inputs[a];
    for (std::size_t b = 0; b < p; ++b) arg += m.coupling[a][b] * y[b];
    if (m.adaptation) arg += m.adaptation_weights[a] * y[p];
    const double c = m.sigmoids[a].gain / std::sqrt(1.0 + 2.0 * std::pow(m.sigmoids[a].gain * m.sigmoids[a].noise_sd, 2));
    out[a] = (-y[a] + std::erf(c * arg)) / m.time_constants[a];
  }
  if (m.adaptation) {
    double sum = 0;
    for (std::size_t a = 0; a < p; ++a) sum += y[a];
    out[p] = m.adaptation->rate * (m.adaptation->offset + m.adaptation->leak * y[p] - sum);
  }
  return out;
}

}  // namespace

TEST_CASE("rhs matches the term-by-term formula") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const MeanFieldModel& m : {three_populations(), make_wc2d(canard2d()), make_wc3d(mmo3d())}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> y(m.dimension());
      for (double& v : y) v = u(rng);
      const auto got = rhs(m, y);
      const auto want = direct_rhs(m, y);
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("jacobian agrees with central differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const MeanFieldModel& m : {three_populations(), make_wc2d(canard2d()), make_wc3d(mmo3d())}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> y(m.dimension());
      for (double& v : y) v = u(rng);
      const Eigen::MatrixXd jac = jacobian(m, y);
      const double h = 1e-6;
      for (std::size_t j = 0; j < y.size(); ++j) {
        auto yp = y, ym = y;
        yp[j] += h;
        ym[j] -= h;
        const auto fp = rhs(m, yp), fm = rhs(m, ym);
        for (std::size_t i = 0; i < y.size(); ++i)
          CHECK(std::fabs(jac(i, j) - (fp[i] - fm[i]) / (2 * h)) < 1e-6 * (1.0 + std::fabs(jac(i, j))));
      }
    }
  }
}

TEST_CASE("wc2d builder equals the general model") {
  const Wc2dParams p = canard2d();
  const MeanFieldModel a = make_wc2d(p);
  CHECK(a.kind == ModelKind::kWc2d);
  CHECK(a.epsilon == p.epsilon);
  MeanFieldModel b;
  b.coupling = {{p.j11, p.j12}, {p.j21, p.j22}};
  b.sigmoids = {{p.g1, p.sigma1}, {p.g2, p.sigma2}};
  b.time_constants = {p.epsilon, 1.0};
  b.inputs = {p.ze, 0.0};
  b.adaptation_weights = {0.0, 0.0};
  for (double x : {-0.8, -0.1, 0.4})
    for (double y : {-0.5, 0.0, 0.9}) {
      const std::vector<double> s{x, y};
      CHECK(rhs(a, s) == rhs(b, s));
    }
  const auto sa = integrate(a, {0.1, 0.2}, 5.0, {1e-10, 1e-10}, 0.5);
  const auto sb = integrate(b, {0.1, 0.2}, 5.0, {1e-10, 1e-10}, 0.5);
  CHECK(sa.states == sb.states);
}

TEST_CASE("frozen adaptation reduces wc3d to wc2d") {
  Wc3dParams p3 = mmo3d();
  MeanFieldModel m3 = make_wc3d(p3);
  m3.adaptation->rate = 0.0;
  Wc2dParams p2;
  p2.j11 = p3.j11, p2.j12 = p3.j12, p2.j21 = p3.j21, p2.j22 = p3.j22;
  p2.g1 = p3.g1, p2.g2 = p3.g2, p2.sigma1 = p3.sigma1, p2.ze = -0.4, p2.epsilon = p3.epsilon;
  const auto s3 = integrate(m3, {0.1, -0.2, -0.4}, 2.0, {1e-11, 1e-11}, 0.1);
  const auto s2 = integrate(make_wc2d(p2), {0.1, -0.2}, 2.0, {1e-11, 1e-11}, 0.1);
  REQUIRE(s3.times.size() == s2.times.size());
  for (std::size_t i = 0; i < s3.times.size(); ++i) {
    CHECK(s3.states[i][0] == doctest::Approx(s2.states[i][0]).epsilon(1e-7));
    CHECK(s3.states[i][1] == doctest::Approx(s2.states[i][1]).epsilon(1e-7));
    CHECK(s3.states[i][2] == doctest::Approx(-0.4).epsilon(1e-14));
  }
}

TEST_CASE("dormand-prince on a linear system") {
  const OdeRhs f = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = -y[0];
    d[1] = y[2];
    d[2] = -y[1];
  };
  OdeOptions o;
  o.output_dt = 0.25;
  const auto s = integrate_ode(f, {1.0, 0.0, 1.0}, 0.0, 10.0, o);
  CHECK(s.times.size() == 41);
  CHECK(s.times.back() == 10.0);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double t = s.times[i];
    CHECK(std::fabs(s.states[i][0] - std::exp(-t)) < 1e-7);
    CHECK(std::fabs(s.states[i][1] - std::sin(t)) < 1e-7);
  }
  CHECK(s.component(2).size() == s.times.size());
  CHECK(s.stats.accepted > 0);
}

TEST_CASE("error shrinks with the tolerance") {
  const OdeRhs f = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = y[1];
    d[1] = -y[0];
  };
  double prev = 1.0;
  for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    OdeOptions o;
    o.tolerances = {tol, tol};
    const auto s = integrate_ode(f, {1.0, 0.0}, 0.0, 20.0, o);
    const double err = std::fabs(s.final_state()[0] - std::cos(20.0));
    CHECK(err < prev);
    CHECK(err < 1e3 * tol);
    prev = err;
  }
}

TEST_CASE("trajectories stay in the activity box") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const MeanFieldModel m = make_wc2d(canard2d());
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = integrate(m, {u(rng), u(rng)}, 20.0, {1e-9, 1e-9}, 0.05);
    for (const auto& st : s.states)
      for (double v : st) CHECK(std::fabs(v) <= 1.0 + 1e-9);
  }
}

TEST_CASE("solver failures") {
  const OdeRhs blow = [](double, std::span<const double> y, std::span<double> d) { d[0] = y[0] * y[0]; };
  CHECK_THROWS_AS(integrate_ode(blow, {1.0}, 0.0, 2.0, {}), Error);
  const OdeRhs stiff = [](double, std::span<const double> y, std::span<double> d) { d[0] = -1e7 * (y[0] - 1.0); };
  OdeOptions o;
  o.min_step = 1e-3;
  try {
    integrate_ode(stiff, {0.0}, 0.0, 1.0, o);
    FAIL("expected StiffnessError");
  } catch (const StiffnessError& e) {
    CHECK(e.time() >= 0.0);
    CHECK(e.code() == ErrorCode::kStiffness);
  }
  const OdeRhs nan = [](double t, std::span<const double>, std::span<double> d) { d[0] = t > 0.5 ? NAN : 1.0; };
  CHECK_THROWS_AS(integrate_ode(nan, {0.0}, 0.0, 1.0, {}), Error);
}

TEST_CASE("named parameters") {
  MeanFieldModel m = make_wc3d(mmo3d());
  CHECK(get_parameter(m, "k") == -1.37);
  CHECK(get_parameter(m, "gamma") == -0.8);
  CHECK(get_parameter(m, "J12") == -8.0);
  CHECK(get_parameter(m, "sigma1") == 2.0);
  set_parameter(m, "epsilon", 0.01);
  CHECK(m.time_constants[0] == 0.01);
  CHECK(m.epsilon == 0.01);
  const MeanFieldModel w = with_parameter(m, "g2", 3.0);
  CHECK(w.sigmoids[1].gain == 3.0);
  CHECK(m.sigmoids[1].gain == 2.8);
  CHECK_THROWS_AS(get_parameter(m, "bogus"), InvalidArgument);
  CHECK_THROWS_AS(get_parameter(m, "J31"), InvalidArgument);
  MeanFieldModel two = make_wc2d(canard2d());
  set_parameter(two, "ze", 0.3);
  CHECK(two.inputs[0] == 0.3);
}

TEST_CASE("model validation") {
  MeanFieldModel m = three_populations();
  CHECK_NOTHROW(m.validate());
  m.coupling[1].pop_back();
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m = three_populations();
  m.time_constants[2] = 0.0;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m = three_populations();
  m.sigmoids[0].gain = -1.0;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
}

TEST_CASE("meanfield_of tags the model kind") {
  NetworkConfig c;
  c.populations = {PopulationSpec{.size = 10, .time_constant = 0.05, .input = -0.2, .sigmoid = {1, 1.4}},
                   PopulationSpec{.size = 10, .time_constant = 1.0, .sigmoid = {2.8, 0}}};
  c.coupling = {{4, -6.3}, {0.85, -2.1}};
  const MeanFieldModel m = meanfield_of(c);
  CHECK(m.kind == ModelKind::kWc2d);
  CHECK(m.epsilon == 0.05);
  CHECK(!m.adaptation);
  c.populations[0].input = 0.0;
  c.populations[0].adaptation_weight = 1.0;
  c.adaptation = AdaptationSpec{1.0, -1.37, -0.8, 0.0};
  const MeanFieldModel m3 = meanfield_of(c);
  CHECK(m3.kind == ModelKind::kWc3d);
  CHECK(m3.dimension() == 3);
  c.populations[1].time_constant = 2.0;
  CHECK(meanfield_of(c).kind == ModelKind::kGeneral);
}
