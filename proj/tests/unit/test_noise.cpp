#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfnet/errors.hpp"
#include "mfnet/noise.hpp"

using namespace mfnet;

TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("gaussian moments") {
  GaussianStream g({42, 7});
  const int n = 1'000'000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  CHECK(g.draws() == static_cast<std::uint64_t>(n));
  CHECK(std::fabs(s1 / n) < 5.0 / std::sqrt(n));
  CHECK(std::fabs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(s3 / n) < 5.0 * std::sqrt(15.0 / n));
  CHECK(std::fabs(s4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("streams are reproducible and distinct") {
  GaussianStream a({1, 3}), b({1, 3}), c({1, 4}), d({2, 3});
  for (int i = 0; i < 100; ++i) {
    const double x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
    CHECK(x != d.next());
  }
}

TEST_CASE("independent streams are uncorrelated") {
  const int n = 200'000;
  GaussianStream a({9, 0}), b({9, 1});
  double sab = 0;
  for (int i = 0; i < n; ++i) sab += a.next() * b.next();
  CHECK(std::fabs(sab / n) < 5.0 / std::sqrt(n));
}

TEST_CASE("ou spec validation") {
  CHECK_THROWS_AS(OuProcessSpec({0.0, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(OuProcessSpec({1.0, -1.0}).validate(), InvalidArgument);
  CHECK_NOTHROW(OuProcessSpec({1.0, 0.0}).validate());
}

TEST_CASE("ou stationary law and lag-one autocorrelation") {
  const OuProcessSpec spec{0.5, 1.5};
  const double dt = 0.1;
  GaussianStream g({5, 0});
  double x = ou_initial(spec, g);
  const int n = 400'000;
  double s1 = 0, s2 = 0, lag = 0, prev = x;
  for (int i = 0; i < n; ++i) {
    x = ou_step(x, dt, spec, g);
    s1 += x;
    s2 += x * x;
    lag += x * prev;
    prev = x;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(var == doctest::Approx(spec.stationary_sd * spec.stationary_sd).epsilon(0.03));
  CHECK(lag / n / var == doctest::Approx(std::exp(-dt / spec.relaxation_time)).epsilon(0.01));
}

TEST_CASE("stepper matches ou_step") {
  const OuProcessSpec spec{2.0, 0.7};
  const OuStepper st(spec, 0.01);
  CHECK(st.decay == doctest::Approx(std::exp(-0.005)));
  CHECK(st.kick == doctest::Approx(0.7 * std::sqrt(1.0 - std::exp(-0.01))));
  GaussianStream a({3, 3}), b({3, 3});
  double x = 0.3, y = 0.3;
  for (int i = 0; i < 100; ++i) {
    x = ou_step(x, 0.01, spec, a);
    y = st.step(y, b.next());
    CHECK(x == doctest::Approx(y).epsilon(1e-14));
  }
}

TEST_CASE("zero noise is deterministic decay") {
  const OuProcessSpec spec{1.0, 0.0};
  GaussianStream g({0, 0});
  CHECK(ou_initial(spec, g) == 0.0);
  CHECK(ou_step(1.0, 0.5, spec, g) == doctest::Approx(std::exp(-0.5)));
}
