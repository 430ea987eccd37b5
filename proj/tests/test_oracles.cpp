// Self-checks for the reference integrators: closed-form anchors, an
// independent Airy series, and the classical Airy-product kernel. If these
// pass, the oracles are trustworthy enough to freeze values from.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "kpmass/constants.hpp"
#include "kpmass/testing/oracles.hpp"

using kpmass::testing::CL;
using kpmass::testing::HalfLineIntegrand;
using kpmass::testing::OracleOptions;

namespace {

// Test-local Maclaurin Airy series, independent of the library implementation.
// Converges comfortably for |z| <= 3.
struct AiryPair {
  long double ai, aip;
};

AiryPair airy_maclaurin(long double z) {
  long double f = 1.0L, fp = 0.0L, g = z, gp = 1.0L;
  long double tf = 1.0L, tg = z;
  for (int k = 1; k <= 40; ++k) {
    const long double k3 = 3.0L * k;
    tf *= z * z * z / (k3 * (k3 - 1.0L) * (k3 - 2.0L)) * (k3 - 2.0L);
    tg *= z * z * z / ((k3 + 1.0L) * k3 * (k3 - 1.0L)) * (k3 - 1.0L);
    f += tf;
    g += tg;
    fp += tf * k3 / z;
    gp += tg * (k3 + 1.0L) / z;
    if (std::fabs(tf) + std::fabs(tg) < 1e-25L) break;
  }
  if (z == 0.0L) {
    f = 1.0L;
    g = 0.0L;
    fp = 0.0L;
    gp = 1.0L;
  }
  return {kpmass::kAiryAi0 * f + kpmass::kAiryAiP0 * g,
          kpmass::kAiryAi0 * fp + kpmass::kAiryAiP0 * gp};
}

HalfLineIntegrand power_phase(long double p, long double lambda, long double c2,
                              long double alpha) {
  HalfLineIntegrand f;
  f.p = p;
  f.phase = [=](long double xi) { return lambda * xi + c2 * std::pow(xi, alpha + 1.0L); };
  f.dphase = [=](long double xi) {
    return lambda + c2 * (alpha + 1.0L) * std::pow(xi, alpha);
  };
  return f;
}

}  // namespace

TEST_CASE("gamma constants satisfy reflection and duplication identities") {
  using namespace kpmass;
  // Gamma(1/3) Gamma(2/3) = pi / sin(pi/3) = 2 pi / sqrt(3)
  const long double reflect = kGamma13 * kGamma23;
  REQUIRE(std::fabs(reflect - 2.0L * kPi / std::sqrt(3.0L)) < 1e-17L * reflect);
  // Gamma(1/6) = 2^(2/3) sqrt(pi) Gamma(1/3) / Gamma(2/3)  (Legendre duplication at z=1/6)
  const long double dup = std::pow(2.0L, 2.0L / 3.0L) * std::sqrt(kPi) * kGamma13 / kGamma23;
  REQUIRE(std::fabs(kGamma16 - dup) < 1e-17L * kGamma16);
  // stdlib cross-check
  REQUIRE(std::fabs(std::tgammal(1.0L / 3.0L) - kGamma13) < 1e-16L * kGamma13);
  REQUIRE(std::fabs(std::tgammal(1.0L / 6.0L) - kGamma16) < 1e-16L * kGamma16);
  // Airy values at the origin
  REQUIRE(std::fabs(kAiryAi0 - std::pow(3.0L, -2.0L / 3.0L) / kGamma23) < 1e-17L);
  REQUIRE(std::fabs(kAiryAiP0 + std::pow(3.0L, -1.0L / 3.0L) / kGamma13) < 1e-17L);
}

TEST_CASE("halfline oracle reproduces closed-form power-phase anchors") {
  for (long double p : {-0.5L, 0.0L, 0.5L, 1.0L}) {
    for (long double alpha : {1.5L, 2.0L, 3.0L}) {
      for (long double c2 : {0.5L, 2.0L}) {
        const auto r = kpmass::testing::integrate_halfline(power_phase(p, 0.0L, c2, alpha));
        const CL want = kpmass::testing::anchor_power_phase(p, c2, alpha);
        INFO("p=" << (double)p << " alpha=" << (double)alpha << " c2=" << (double)c2);
        REQUIRE(std::abs(r.value - want) < 5e-10L * (1.0L + std::abs(want)));
      }
    }
  }
}

TEST_CASE("halfline oracle matches the Airy cosine integral for cubic phase") {
  // Re integral_0^inf exp(i(lambda xi + xi^3)) dxi = 3^(-1/3) pi Ai(3^(-1/3) lambda)
  const long double s = std::pow(3.0L, -1.0L / 3.0L);
  for (long double lam : {-4.0L, -2.0L, -1.0L, 0.0L, 1.0L, 2.5L}) {
    const auto r = kpmass::testing::integrate_halfline(power_phase(0.0L, lam, 1.0L, 2.0L));
    const long double want = s * kpmass::kPi * airy_maclaurin(s * lam).ai;
    INFO("lambda=" << (double)lam);
    REQUIRE(std::fabs(r.value.real() - want) < 2e-10L);
  }
}

TEST_CASE("halfline oracle is stable under node doubling") {
  OracleOptions dense;
  dense.points_per_period *= 2;
  dense.min_body_points *= 2;
  dense.segment_points *= 2;
  dense.milestones += 20;
  for (long double p : {-0.5L, 0.5L}) {
    const auto f = power_phase(p, -30.0L, 1.0L, 2.0L);
    const auto a = kpmass::testing::integrate_halfline(f);
    const auto b = kpmass::testing::integrate_halfline(f, dense);
    INFO("p=" << (double)p);
    REQUIRE(std::abs(a.value - b.value) < 2e-10L);
  }
}

TEST_CASE("gaussian transverse factor matches direct quadrature") {
  for (long double a : {0.7L, -0.7L, 2.5L}) {
    for (long double b : {0.0L, 1.2L}) {
      for (long double delta : {0.05L, 0.02L}) {
        const CL cf = kpmass::testing::gauss_factor(b, a, delta);
        const CL dq = kpmass::testing::gauss_factor_direct(b, a, delta);
        INFO("a=" << (double)a << " b=" << (double)b << " delta=" << (double)delta);
        REQUIRE(std::abs(cf - dq) < 1e-8L * (1.0L + std::abs(cf)));
      }
    }
  }
}

TEST_CASE("brute-force dispersive kernel matches the classical closed form") {
  // alpha=2, eps=+1, t=1: G = -(1/sqrt 3) Ai(zeta) Ai'(zeta), A = -12^(-1/6) Ai(zeta)^2,
  // zeta = 12^(-1/3) (x + y^2/4).
  const long double c1 = std::pow(12.0L, -1.0L / 3.0L);
  const long double x = 0.3L, y = 0.8L;
  const long double zeta = c1 * (x + 0.25L * y * y);
  const AiryPair ai = airy_maclaurin(zeta);

  const auto g = kpmass::testing::dispersive_bruteforce(2, false, 2.0L, +1, 1.0L, x, y);
  const long double g_want = -(1.0L / std::sqrt(3.0L)) * ai.ai * ai.aip;
  REQUIRE(std::fabs(g.value.real() - g_want) < 2e-6L * std::fabs(g_want));

  const auto a = kpmass::testing::dispersive_bruteforce(2, true, 2.0L, +1, 1.0L, x, y);
  const long double a_want = -std::pow(12.0L, -1.0L / 6.0L) * ai.ai * ai.ai;
  REQUIRE(std::fabs(a.value.real() - a_want) < 2e-6L * std::fabs(a_want));

  const auto g0 = kpmass::testing::dispersive_bruteforce(2, false, 2.0L, +1, 1.0L, 0.0L, 0.0L);
  REQUIRE(std::fabs(g0.value.real() - 1.0L / (6.0L * kpmass::kPi)) < 2e-6L);
}
