// Airy implementation checks: closed-form origin values, the defining ODE via
// finite differences, branch cross-validation, classical decay/oscillation
// behavior, and the oscillatory-integral representation as an independent
// reference route.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "kpmass/airy.hpp"
#include "kpmass/constants.hpp"
#include "kpmass/testing/oracles.hpp"

using kpmass::airy_ai;
using kpmass::airy_ai_prime;

TEST_CASE("airy values at the origin match the closed forms") {
  REQUIRE(std::fabs(airy_ai(0.0) - (double)kpmass::kAiryAi0) < 1e-16);
  REQUIRE(std::fabs(airy_ai_prime(0.0) - (double)kpmass::kAiryAiP0) < 1e-16);
}

TEST_CASE("airy satisfies its ODE under central differencing") {
  // (Ai(x+h) - 2 Ai(x) + Ai(x-h))/h^2 = x Ai(x); h = 1e-4 amplifies pointwise
  // noise by 4e8, so this is a demanding accuracy test across all branches.
  const double h = 1e-4;
  for (double x = -20.0; x <= 20.0 + 1e-9; x += 0.5) {
    const double fd = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
    INFO("x=" << x);
    REQUIRE(std::fabs(fd - x * airy_ai(x)) < 1e-6);
  }
}

TEST_CASE("airy derivative is consistent with the value branch") {
  const double h = 1e-5;
  for (double x = -19.7; x <= 19.7 + 1e-9; x += 0.7) {
    const double fd = (airy_ai(x + h) - airy_ai(x - h)) / (2.0 * h);
    INFO("x=" << x);
    REQUIRE(std::fabs(fd - airy_ai_prime(x)) < 1e-8);
  }
}

TEST_CASE("airy positive-axis decay and monotonicity") {
  for (int x = 1; x <= 10; ++x) {
    REQUIRE(airy_ai(x) > 0.0);
    if (x > 1) REQUIRE(airy_ai(x) < airy_ai(x - 1));
  }
  // The exact ratio is 1.0197e-6; assert the decay with the correct constant.
  REQUIRE(airy_ai(10.0) / airy_ai(5.0) < 1.1e-6);
  REQUIRE(airy_ai(10.0) / airy_ai(5.0) > 0.9e-6);
}

TEST_CASE("airy branch handovers agree") {
  using namespace kpmass::airy_detail;
  // Maclaurin vs marched table around the |x| = 4.5 switch.
  for (double x = 3.5; x <= 5.5 + 1e-9; x += 0.05) {
    for (double s : {1.0, -1.0}) {
      const Pair a = maclaurin(s * x);
      const Pair b = march_eval(s * x);
      INFO("x=" << s * x);
      REQUIRE(std::fabs(a.ai - b.ai) < 1e-15);
      REQUIRE(std::fabs(a.aip - b.aip) < 1e-15);
    }
  }
  // Marched table vs asymptotics at both far edges.
  for (double x = 13.0; x <= 14.0 + 1e-9; x += 0.125) {
    const Pair a = march_eval(x);
    const Pair b = asymptotic_pos(x);
    INFO("x=" << x);
    REQUIRE(std::fabs(a.ai - b.ai) < 1e-15 * std::fabs(b.ai) + 1e-22);
    REQUIRE(std::fabs(a.aip - b.aip) < 1e-15 * std::fabs(b.aip) + 1e-22);
  }
  for (double x = -21.0; x <= -20.0 + 1e-9; x += 0.125) {
    const Pair a = march_eval(x);
    const Pair b = asymptotic_neg(x);
    INFO("x=" << x);
    REQUIRE(std::fabs(a.ai - b.ai) < 5e-15);
    REQUIRE(std::fabs(a.aip - b.aip) < 5e-14);
  }
}

TEST_CASE("airy matches its oscillatory integral representation") {
  // Ai(z) = (3^(1/3)/pi) * Re integral_0^inf exp(i(3^(1/3) z xi + xi^3)) dxi
  // Ai'(z) = -(3^(2/3)/pi) * Im integral_0^inf xi exp(i(3^(1/3) z xi + xi^3)) dxi
  const long double r = std::pow(3.0L, 1.0L / 3.0L);
  for (double z : {-8.0, -5.2, -2.0, 0.0, 1.3, 4.0, 4.8, 6.5}) {
    kpmass::testing::HalfLineIntegrand f;
    const long double lam = r * (long double)z;
    f.phase = [=](long double xi) { return lam * xi + xi * xi * xi; };
    f.dphase = [=](long double xi) { return lam + 3.0L * xi * xi; };
    f.p = 0.0L;
    const auto g = kpmass::testing::integrate_halfline(f);
    INFO("z=" << z);
    REQUIRE(std::fabs((double)(r / kpmass::kPi * g.value.real()) - airy_ai(z)) < 2e-9);
    f.p = 1.0L;
    const auto gp = kpmass::testing::integrate_halfline(f);
    REQUIRE(std::fabs((double)(-r * r / kpmass::kPi * gp.value.imag()) - airy_ai_prime(z)) <
            2e-9);
  }
}

TEST_CASE("airy oscillation: sign changes on the negative half-line") {
  // Ai has zeros near -2.34, -4.09, -5.52, -6.79, -7.94, -9.02 inside (-10, 0).
  int changes = 0;
  double prev = airy_ai(-10.0);
  for (double x = -10.0 + 0.01; x <= 0.0 + 1e-9; x += 0.01) {
    const double cur = airy_ai(x);
    if ((prev < 0.0) != (cur < 0.0)) ++changes;
    prev = cur;
  }
  REQUIRE(changes == 6);
}

TEST_CASE("airy rejects non-finite arguments") {
  REQUIRE_THROWS_AS(airy_ai(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  REQUIRE_THROWS_AS(airy_ai_prime(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}
