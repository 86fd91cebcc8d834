#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfnet/errors.hpp"
#include "mfnet/meanfield.hpp"
#include "mfnet/network.hpp"
#include "mfnet/parallel.hpp"

using namespace mfnet;

namespace {

NetworkConfig canard(int n, double sigma1 = 1.4) {
  NetworkConfig c;
  c.populations = {PopulationSpec{.size = n, .time_constant = 0.05, .input = -0.2, .sigmoid = {1, sigma1},
                                  .initial_spread = 0.1},
                   PopulationSpec{.size = n, .time_constant = 1.0, .sigmoid = {2.8, 0}, .initial_spread = 0.1}};
  c.coupling = {{4, -6.3}, {0.85, -2.1}};
  c.dt = 0.005;
  c.horizon = 2.0;
  c.seed = 17;
  return c;
}

NetworkConfig mmo(int n) {
  NetworkConfig c;
  c.populations = {PopulationSpec{.size = n, .time_constant = 0.005, .sigmoid = {4, 2}, .adaptation_weight = 1.0,
                                  .initial_mean = -0.5, .initial_spread = 0.1},
                   PopulationSpec{.size = n, .time_constant = 1.0, .sigmoid = {2.8, 0}, .initial_mean = -0.3,
                                  .initial_spread = 0.1}};
  c.coupling = {{5.08, -8}, {0.85, -2.1}};
  c.adaptation = AdaptationSpec{1.0, -1.37, -0.8, 0.0};
  c.dt = 0.0005;
  c.horizon = 1.0;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("configuration validation") {
  NetworkConfig c = canard(10);
  CHECK_NOTHROW(c.validate());
  CHECK(c.neuron_count() == 20);
  CHECK(c.population_offsets() == std::vector<std::size_t>{0, 10, 20});
  c.coupling[0].pop_back();
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = canard(10);
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = canard(10);
  c.horizon = 0.001;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = canard(0);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = canard(10);
  c.dt = 0.01;
  CHECK(c.warnings().size() == 1);
}

TEST_CASE("uncoupled noiseless neurons relax to the sigmoid of the input") {
  NetworkConfig c = canard(50, 0.0);
  c.coupling = {{0, 0}, {0, 0}};
  c.populations[1].input = 0.4;
  c.horizon = 20.0;
  const auto rec = simulate_network(c);
  CHECK(rec.population_means.back()[0] == doctest::Approx(std::erf(-0.2)).epsilon(1e-9));
  CHECK(rec.population_means.back()[1] == doctest::Approx(std::erf(2.8 * 0.4)).epsilon(1e-7));
}

TEST_CASE("recording layout") {
  NetworkConfig c = canard(20);
  RecordingPlan plan;
  plan.record_every = 7;
  plan.sampled_neurons = 6;
  const auto rec = simulate_network(c, plan);
  rec.check_consistent();
  // 400 steps: rows at 0, 7, ..., 399 plus the final step.
  CHECK(rec.size() == 400 / 7 + 2);
  CHECK(rec.times.back() == doctest::Approx(2.0));
  CHECK(rec.sampled_neurons.size() == 6);
  CHECK(rec.neuron_samples.front().size() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(rec.sampled_populations[i] == (rec.sampled_neurons[i] < 20 ? 0u : 1u));
  CHECK(rec.adaptation_trace.empty());
  plan.sample_indices = {3, 25};
  const auto pick = simulate_network(c, plan);
  CHECK(pick.sampled_neurons == std::vector<std::size_t>{3, 25});
  plan.sample_indices = {40};
  CHECK_THROWS_AS(simulate_network(c, plan), InvalidArgument);
  RecordingPlan full;
  full.full = true;
  CHECK(simulate_network(c, full).sampled_neurons.size() == 40);
}

TEST_CASE("empirical mean of the final state") {
  const NetworkConfig c = canard(30);
  NetworkState state;
  const auto rec = simulate_network(c, {}, &state);
  CHECK(state.time == doctest::Approx(c.horizon));
  double s0 = 0, s1 = 0;
  for (int i = 0; i < 30; ++i) s0 += state.activities[i];
  for (int i = 30; i < 60; ++i) s1 += state.activities[i];
  const auto m = empirical_mean(state, c);
  CHECK(m[0] == doctest::Approx(s0 / 30).epsilon(1e-13));
  CHECK(m[1] == doctest::Approx(s1 / 30).epsilon(1e-13));
  CHECK(rec.population_means.back()[0] == doctest::Approx(m[0]).epsilon(1e-13));
}

TEST_CASE("activities stay in the unit box") {
  RecordingPlan plan;
  plan.full = true;
  plan.record_every = 1;
  const auto rec = simulate_network(canard(40), plan);
  for (const auto& row : rec.neuron_samples)
    for (double v : row) CHECK(std::fabs(v) <= 1.0);
}

TEST_CASE("same seed reproduces, other seed differs") {
  const NetworkConfig c = canard(100);
  const auto a = simulate_network(c);
  const auto b = simulate_network(c);
  CHECK(a.population_means == b.population_means);
  CHECK(a.neuron_samples == b.neuron_samples);
  NetworkConfig d = c;
  d.seed = 18;
  CHECK(simulate_network(d).population_means != a.population_means);
}

TEST_CASE("thread count does not change results") {
  NetworkConfig c = canard(1500);
  RecordingPlan plan;
  plan.record_every = 1;
  set_thread_count(1);
  const auto one = simulate_network(c, plan);
  set_thread_count(4);
  const auto four = simulate_network(c, plan);
  set_thread_count(1);
  CHECK(one.population_means == four.population_means);
  CHECK(one.neuron_samples == four.neuron_samples);
  NetworkConfig m = mmo(1500);
  set_thread_count(3);
  const auto a3 = simulate_network(m, plan);
  set_thread_count(1);
  const auto a1 = simulate_network(m, plan);
  CHECK(a3.population_means == a1.population_means);
  CHECK(a3.adaptation_trace == a1.adaptation_trace);
}

TEST_CASE("parallel_for runs every index once") {
  set_thread_count(4);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw InvalidArgument("seven");
                  }),
                  InvalidArgument);
  set_thread_count(1);
}

TEST_CASE("frozen adaptation matches a constant input") {
  NetworkConfig m = mmo(50);
  m.adaptation->rate = 0.0;
  m.adaptation->initial = -0.4;
  m.horizon = 0.2;
  NetworkConfig w = m;
  w.adaptation.reset();
  w.populations[0].adaptation_weight = 0.0;
  w.populations[0].input = -0.4;
  const auto a = simulate_network(m);
  const auto b = simulate_wc_network(w);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t p = 0; p < 2; ++p)
      CHECK(a.population_means[i][p] == doctest::Approx(b.population_means[i][p]).epsilon(1e-12));
  for (double u : a.adaptation_trace) CHECK(u == -0.4);
}

TEST_CASE("adaptation trace follows its equation") {
  NetworkConfig m = mmo(100);
  m.horizon = 0.1;
  RecordingPlan plan;
  plan.record_every = 1;
  const auto rec = simulate_network(m, plan);
  REQUIRE(rec.adaptation_trace.size() == rec.size());
  for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
    const double u = rec.adaptation_trace[i];
    const double drift = -1.37 - 0.8 * u - rec.population_means[i][0] - rec.population_means[i][1];
    CHECK(rec.adaptation_trace[i + 1] == doctest::Approx(u + m.dt * drift).epsilon(1e-12));
  }
  CHECK_THROWS_AS(simulate_adaptation_network(canard(10)), InvalidArgument);
}

TEST_CASE("noiseless network error is first order in dt") {
  NetworkConfig c = canard(1, 0.0);
  c.populations[0].initial_spread = c.populations[1].initial_spread = 0.0;
  c.populations[0].initial_mean = 0.3;
  c.populations[1].initial_mean = -0.2;
  const auto ref = integrate(meanfield_of(c), {0.3, -0.2}, c.horizon, {1e-12, 1e-12}, 0.1);
  auto error = [&](double dt) {
    c.dt = dt;
    RecordingPlan plan;
    plan.record_every = static_cast<std::size_t>(std::llround(0.1 / dt));
    const auto rec = simulate_network(c, plan);
    REQUIRE(rec.size() == ref.times.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i)
      for (std::size_t p = 0; p < 2; ++p)
        worst = std::max(worst, std::fabs(rec.population_means[i][p] - ref.states[i][p]));
    return worst;
  };
  const double e1 = error(0.004), e2 = error(0.002), e3 = error(0.001);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("non-finite state raises an integration fault") {
  NetworkConfig c = canard(10);
  c.dt = 10.0;
  c.horizon = 2000.0;
  try {
    simulate_network(c);
    FAIL("expected IntegrationFault");
  } catch (const IntegrationFault& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= c.horizon);
  }
}

TEST_CASE("pairwise correlation") {
  NetworkConfig c = canard(200);
  c.horizon = 50.0;
  RecordingPlan plan;
  plan.record_every = 5;
  plan.sample_indices = {0, 1, 2, 3};
  const auto rec = simulate_network(c, plan);
  const auto self = pairwise_correlation(rec, {{0, 0}, {2, 2}});
  CHECK(self[0] == doctest::Approx(1.0));
  CHECK(self[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(pairwise_correlation(rec, {{0, 9}}), InvalidArgument);

  // Uncoupled neurons driven by independent fast noise.
  NetworkConfig u = canard(200, 1.0);
  u.coupling = {{0, 0}, {0, 0}};
  u.populations[0].ou_relaxation_time = 0.01;
  u.dt = 0.01;
  u.horizon = 400.0;
  plan.sample_indices = {0, 1, 2, 3, 4, 5, 6, 7};
  const auto null = simulate_network(u, plan);
  const auto r = pairwise_correlation(null, {{0, 1}, {2, 3}, {4, 5}, {6, 7}});
  for (double v : r) CHECK(std::fabs(v) < 0.05);
}
