#pragma once

// Airy Ai and Ai' on the real line, double accuracy with long double internals.
//
// Branches:
//   |x| <= 4.5          Maclaurin series (no cancellation trouble this close in).
//   4.5 < x <= 14,      order-26 Taylor steps off a precomputed node table that
//   -21.25 <= x < -4.5  is marched once, downward, from an asymptotic seed at
//                       x = 14. Downward is the stable direction: any admixture
//                       of the growing companion solution picked up at the seed
//                       shrinks relative to Ai as x decreases.
//   beyond              standard asymptotic expansions in zeta = (2/3)|x|^(3/2).
// The plain series->asymptotic handover cannot reach double accuracy near the
// switch (the asymptotic series bottoms out near 1e-7 at x = 5); the marched
// table bridges that gap. Branches are cross-checked in the test suite.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kpmass/constants.hpp"

namespace kpmass {
namespace airy_detail {

struct Pair {
  long double ai, aip;
};

inline Pair maclaurin(long double x) {
  // Ai = Ai(0) f(x) + Ai'(0) g(x), f,g the standard y'' = x y power series.
  long double f = 1.0L, g = x, fp = 0.0L, gp = 1.0L;
  long double tf = 1.0L, tg = x;
  const long double x3 = x * x * x;
  for (int k = 1; k <= 60; ++k) {
    const long double k3 = 3.0L * k;
    tf *= x3 / (k3 * (k3 - 1.0L));
    tg *= x3 / ((k3 + 1.0L) * k3);
    f += tf;
    g += tg;
    if (x != 0.0L) {
      fp += tf * k3 / x;
      gp += tg * (k3 + 1.0L) / x;
    }
    if (std::fabs(tf) + std::fabs(tg) < 1e-26L * (std::fabs(f) + std::fabs(g))) break;
  }
  return {kAiryAi0 * f + kAiryAiP0 * g, kAiryAi0 * fp + kAiryAiP0 * gp};
}

// One Taylor step of y'' = x y from x0 to x0+h given (y, y')(x0).
// Coefficients: (n+2)(n+1) c_{n+2} = x0 c_n + c_{n-1}.
inline Pair taylor_step(long double x0, Pair y, long double h, int order = 26) {
  std::vector<long double> c(order + 1);
  c[0] = y.ai;
  c[1] = y.aip;
  for (int n = 0; n + 2 <= order; ++n) {
    const long double prev = (n == 0) ? 0.0L : c[n - 1];
    c[n + 2] = (x0 * c[n] + prev) / ((n + 1.0L) * (n + 2.0L));
  }
  long double v = 0.0L, d = 0.0L;
  for (int n = order; n >= 1; --n) {
    v = v * h + c[n];
    d = d * h + c[n] * n;
  }
  v = v * h + c[0];
  // d currently sums n c_n h^{n-1} via Horner ending at n=1
  return {v, d};
}

// Asymptotic u_k, v_k recurrences (DLMF 9.7.1/9.7.2 style):
//   u_0 = 1, u_k = u_{k-1} (6k-5)(6k-3)(6k-1) / (216 k (2k-1)),
//   v_k = u_k (6k+1)/(1-6k).
inline Pair asymptotic_pos(long double x) {
  const long double zeta = (2.0L / 3.0L) * std::pow(x, 1.5L);
  long double u = 1.0L, su = 1.0L, sv = 1.0L;
  long double sign = 1.0L, zp = 1.0L;
  for (int k = 1; k <= 40; ++k) {
    u *= (6.0L * k - 5.0L) * (6.0L * k - 3.0L) * (6.0L * k - 1.0L) /
         (216.0L * k * (2.0L * k - 1.0L));
    sign = -sign;
    zp *= zeta;
    const long double tu = sign * u / zp;
    const long double tv = tu * (6.0L * k + 1.0L) / (1.0L - 6.0L * k);
    if (std::fabs(tu) < 1e-24L) {
      su += tu;
      sv += tv;
      break;
    }
    su += tu;
    sv += tv;
  }
  const long double pref = std::exp(-zeta) / (2.0L * std::sqrt(kPi));
  const long double x4 = std::pow(x, 0.25L);
  return {pref * su / x4, -pref * sv * x4};
}

inline Pair asymptotic_neg(long double x) {
  const long double z = -x;
  const long double zeta = (2.0L / 3.0L) * std::pow(z, 1.5L);
  // split sums over even/odd k of (-1)^k u_k zeta^{-k} (and v_k likewise)
  long double su_c = 1.0L, su_s = 0.0L, sv_s = 1.0L, sv_c = 0.0L;
  long double u = 1.0L, zp = 1.0L;
  for (int k = 1; k <= 40; ++k) {
    u *= (6.0L * k - 5.0L) * (6.0L * k - 3.0L) * (6.0L * k - 1.0L) /
         (216.0L * k * (2.0L * k - 1.0L));
    zp *= zeta;
    const long double tu = u / zp;
    if (std::fabs(tu) < 1e-24L) break;
    const long double tv = tu * (6.0L * k + 1.0L) / (1.0L - 6.0L * k);
    // k = 2m carries (-1)^m into the cos sum (Ai) / sin sum (Ai');
    // k = 2m+1 carries (-1)^m into the sin sum (Ai) / cos sum (Ai').
    if (k % 2 == 1) {
      su_s += ((k % 4 == 1) ? 1.0L : -1.0L) * tu;
      sv_c += ((k % 4 == 1) ? 1.0L : -1.0L) * tv;
    } else {
      su_c += ((k % 4 == 0) ? 1.0L : -1.0L) * tu;
      sv_s += ((k % 4 == 0) ? 1.0L : -1.0L) * tv;
    }
  }
  const long double ang = zeta - 0.25L * kPi;
  const long double c = std::cos(ang), si = std::sin(ang);
  const long double x4 = std::pow(z, 0.25L);
  const long double sp = std::sqrt(kPi);
  return {(c * su_c + si * su_s) / (sp * x4), (si * sv_s - c * sv_c) * x4 / sp};
}

// Node table marched once from the x=14 seed down to -21.25 in steps of 0.25.
struct MarchTable {
  static constexpr long double x_top = 14.0L;
  static constexpr long double step = 0.25L;
  static constexpr int count = 142;  // nodes at 14, 13.75, ..., -21.25
  std::vector<Pair> node;
  MarchTable() {
    node.resize(count);
    node[0] = asymptotic_pos(x_top);
    for (int j = 1; j < count; ++j)
      node[j] = taylor_step(x_top - step * (j - 1), node[j - 1], -step);
  }
};

inline const MarchTable& march() {
  static const MarchTable tab;  // thread-safe one-time init
  return tab;
}

inline Pair march_eval(long double x) {
  const MarchTable& t = march();
  long j = std::lround((MarchTable::x_top - x) / MarchTable::step);
  if (j < 0) j = 0;
  if (j >= MarchTable::count) j = MarchTable::count - 1;
  const long double xj = MarchTable::x_top - MarchTable::step * j;
  return taylor_step(xj, t.node[j], x - xj, 20);
}

inline Pair eval(long double x) {
  if (std::fabs(x) <= 4.5L) return maclaurin(x);
  if (x > 0.0L) return (x <= 14.0L) ? march_eval(x) : asymptotic_pos(x);
  return (x >= -21.0L) ? march_eval(x) : asymptotic_neg(x);
}

}  // namespace airy_detail

inline double airy_ai(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("airy_ai: non-finite argument");
  return static_cast<double>(airy_detail::eval(x).ai);
}

inline double airy_ai_prime(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("airy_ai_prime: non-finite argument");
  return static_cast<double>(airy_detail::eval(x).aip);
}

}  // namespace kpmass
