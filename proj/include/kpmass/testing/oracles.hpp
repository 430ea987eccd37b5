#pragma once

// Reference integrators used only by the test suite. Everything here is kept
// deliberately independent of the main library: plain composite Simpson rules,
// phase-milestone splitting, and repeated averaging of partial sums. Slow but
// transparent, so library results can be checked against a second route.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpmass::testing {

using CL = std::complex<long double>;

struct OracleOptions {
  int points_per_period = 700;  // Simpson subintervals per 2*pi of phase in dense regions
  int min_body_points = 4000;   // floor for the dense-region subinterval count
  int milestones = 80;          // half-period segments walked in the oscillatory tail
  int segment_points = 512;     // Simpson subintervals per half-period segment
};

struct OracleResult {
  CL value{0.0L, 0.0L};
  long double err = 0.0L;  // crude bound: averaging residual of the tail sequence
};

// integrand: xi^p * rest(xi) * exp(i*phase(xi)) on (0, infinity).
// rest must be smooth and bounded on [0, infinity); p > -1.
struct HalfLineIntegrand {
  long double p = 0.0L;
  std::function<CL(long double)> rest;  // empty => identically 1
  std::function<long double(long double)> phase;
  std::function<long double(long double)> dphase;
};

template <class F>
inline CL simpson(F&& f, long double a, long double b, long n) {
  if (n < 2) n = 2;
  if (n % 2) ++n;
  const long double h = (b - a) / n;
  CL odd{0.0L, 0.0L}, even{0.0L, 0.0L};
  for (long i = 1; i < n; i += 2) odd += f(a + i * h);
  for (long i = 2; i < n; i += 2) even += f(a + i * h);
  return (h / 3.0L) * (f(a) + f(b) + 4.0L * odd + 2.0L * even);
}

// Repeated pairwise averaging of a sequence of partial sums. For tails whose
// half-period segments alternate with slowly varying magnitude this converges
// far faster than the raw sums. err reports the spread at the deepest level.
inline CL average_limit(std::vector<CL> s, long double* err = nullptr) {
  if (s.empty()) throw std::invalid_argument("average_limit: empty sequence");
  long double spread = 0.0L;
  while (s.size() > 1) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) s[i] = 0.5L * (s[i] + s[i + 1]);
    s.pop_back();
    if (s.size() == 2) spread = std::abs(s[0] - s[1]);
  }
  if (err) *err = spread;
  return s[0];
}

namespace detail {

// Total phase variation over [a,b], estimated by dense sampling.
inline long double phase_variation(const HalfLineIntegrand& f, long double a, long double b) {
  const int n = 2048;
  long double tv = 0.0L, prev = f.phase(a);
  for (int i = 1; i <= n; ++i) {
    const long double cur = f.phase(a + (b - a) * i / n);
    tv += std::fabs(cur - prev);
    prev = cur;
  }
  return tv;
}

// Last sign change of dphase on a log grid; the tail walk starts safely beyond it.
inline long double monotone_from(const HalfLineIntegrand& f) {
  const int n = 4096;
  long double last = 0.0L;
  long double xprev = 1e-4L, sprev = f.dphase(xprev);
  for (int i = 1; i <= n; ++i) {
    const long double x = 1e-4L * std::pow(1e10L, static_cast<long double>(i) / n);
    const long double s = f.dphase(x);
    if ((sprev < 0.0L) != (s < 0.0L)) last = x;
    xprev = x;
    sprev = s;
  }
  (void)xprev;
  return std::max(1.0L, 2.0L * last);
}

// Solve phase(xi) = target on [lo, inf) where s*phase is increasing; bracketed Newton.
inline long double phase_inverse(const HalfLineIntegrand& f, long double lo, long double target,
                                 long double s) {
  long double step = M_PI / std::max(std::fabs(f.dphase(lo)), 1e-12L);
  long double hi = lo + step;
  int guard = 0;
  while (s * (f.phase(hi) - target) < 0.0L) {
    step *= 2.0L;
    hi = lo + step;
    if (++guard > 200) throw std::runtime_error("phase_inverse: bracket failed");
  }
  long double a = lo, b = hi, x = 0.5L * (a + b);
  for (int it = 0; it < 100; ++it) {
    const long double g = f.phase(x) - target;
    if (std::fabs(g) < 1e-12L * (1.0L + std::fabs(target))) return x;
    if (s * g < 0.0L) a = x; else b = x;
    const long double d = f.dphase(x);
    long double xn = (std::fabs(d) > 1e-300L) ? x - g / d : 0.5L * (a + b);
    if (!(xn > a && xn < b)) xn = 0.5L * (a + b);
    x = xn;
  }
  return x;
}

inline CL eval_integrand(const HalfLineIntegrand& f, long double xi) {
  const long double xs = std::max(xi, 1e-300L);
  CL r = f.rest ? f.rest(xs) : CL{1.0L, 0.0L};
  const long double ph = f.phase(xs);
  return std::pow(xs, f.p) * r * CL{std::cos(ph), std::sin(ph)};
}

}  // namespace detail

// Dense Simpson on [0, min(1,X0)] under xi = v*v (kills the endpoint power),
// dense Simpson on [1, X0], then a half-period milestone walk accelerated by
// repeated averaging. Requires the phase to keep growing without bound along
// the tail; points where the total tail phase stays bounded are rejected.
inline OracleResult integrate_halfline(const HalfLineIntegrand& f, const OracleOptions& opt = {}) {
  if (!f.phase || !f.dphase) throw std::invalid_argument("integrate_halfline: phase callbacks required");
  if (f.p <= -1.0L) throw std::invalid_argument("integrate_halfline: p must exceed -1");

  const long double X0 = detail::monotone_from(f);

  // [0, min(1,X0)] with xi = v^2: integrand 2 v^(2p+1) rest(v^2) exp(i phase(v^2)).
  const long double v1 = std::sqrt(std::min(1.0L, X0));
  auto body_v = [&](long double v) {
    const long double xi = std::max(v * v, 1e-300L);
    CL r = f.rest ? f.rest(xi) : CL{1.0L, 0.0L};
    const long double ph = f.phase(xi);
    return 2.0L * std::pow(v, 2.0L * f.p + 1.0L) * r * CL{std::cos(ph), std::sin(ph)};
  };
  HalfLineIntegrand fv = f;  // phase variation probe in v-coordinates
  fv.phase = [&](long double v) { return f.phase(v * v); };
  long n_body = std::max<long>(opt.min_body_points,
                               static_cast<long>(detail::phase_variation(fv, 0.0L, v1) / (2.0L * M_PI) *
                                                 opt.points_per_period));
  CL total = simpson(body_v, 0.0L, v1, n_body);

  // [1, X0] direct, node count driven by total phase variation.
  if (X0 > 1.0L) {
    const long double tv = detail::phase_variation(f, 1.0L, X0);
    long n_mid = std::max<long>(static_cast<long>(opt.min_body_points * (X0 - 1.0L)),
                                static_cast<long>(tv / (2.0L * M_PI) * opt.points_per_period));
    total += simpson([&](long double xi) { return detail::eval_integrand(f, xi); }, 1.0L, X0, n_mid);
  }

  // Milestone walk: segments of exactly pi phase advance beyond X0.
  const long double d0 = f.dphase(X0);
  if (std::fabs(d0) * X0 < 1e-8L)
    throw std::runtime_error("integrate_halfline: tail phase appears bounded; point unsupported");
  const long double s = (d0 > 0.0L) ? 1.0L : -1.0L;
  std::vector<CL> partial;
  partial.reserve(opt.milestones);
  CL run = total;
  long double lo = X0, philo = f.phase(X0);
  for (int k = 0; k < opt.milestones; ++k) {
    const long double target = philo + s * M_PI;
    const long double hi = detail::phase_inverse(f, lo, target, s);
    const long n_seg = std::max<long>(opt.segment_points, static_cast<long>(256.0L * (hi - lo)));
    const CL seg = simpson([&](long double xi) { return detail::eval_integrand(f, xi); }, lo, hi,
                           n_seg);
    run += seg;
    partial.push_back(run);
    lo = hi;
    philo = target;
    if (std::abs(seg) < 1e-24L * (1.0L + std::abs(run)) && k > 8) break;
  }
  long double err = 0.0L;
  const CL value = average_limit(partial, &err);
  return {value, err};
}

// Integral over (lower, inf) only, with no origin treatment: a half-period
// milestone walk accelerated by repeated averaging. The phase must already be
// strictly monotone at and beyond `lower`.
inline OracleResult integrate_tail(const HalfLineIntegrand& f, long double lower,
                                   const OracleOptions& opt = {}) {
  if (!f.phase || !f.dphase) throw std::invalid_argument("integrate_tail: phase callbacks required");
  if (!(lower > 0.0L)) throw std::invalid_argument("integrate_tail: lower must be positive");
  const long double d0 = f.dphase(lower);
  if (std::fabs(d0) * lower < 1e-8L)
    throw std::runtime_error("integrate_tail: tail phase appears bounded; point unsupported");
  const long double s = (d0 > 0.0L) ? 1.0L : -1.0L;
  std::vector<CL> partial;
  partial.reserve(opt.milestones);
  CL run = {0.0L, 0.0L};
  long double lo = lower, philo = f.phase(lower);
  for (int k = 0; k < opt.milestones; ++k) {
    const long double target = philo + s * M_PI;
    const long double hi = detail::phase_inverse(f, lo, target, s);
    const long n_seg = std::max<long>(opt.segment_points, static_cast<long>(256.0L * (hi - lo)));
    const CL seg = simpson([&](long double xi) { return detail::eval_integrand(f, xi); }, lo, hi,
                           n_seg);
    run += seg;
    partial.push_back(run);
    lo = hi;
    philo = target;
    if (std::abs(seg) < 1e-24L * (1.0L + std::abs(run)) && k > 8) break;
  }
  long double err = 0.0L;
  const CL value = average_limit(partial, &err);
  return {value, err};
}

// Closed-form anchor: integral over (0,inf) of xi^p * exp(i c2 xi^(alpha+1)) dxi
//   = Gamma(s) exp(i pi s / 2) / ((alpha+1) c2^s),  s = (p+1)/(alpha+1).
inline CL anchor_power_phase(long double p, long double c2, long double alpha) {
  const long double s = (p + 1.0L) / (alpha + 1.0L);
  const long double mag = std::tgammal(s) / ((alpha + 1.0L) * std::pow(c2, s));
  return mag * CL{std::cos(M_PI * s / 2.0L), std::sin(M_PI * s / 2.0L)};
}

// Complex-Gaussian transverse factor with mollifier delta > 0:
//   integral over R of exp(i b eta - (delta + i a) eta^2) d eta
//   = sqrt(pi / (delta + i a)) * exp(-b^2 / (4 (delta + i a))).
inline CL gauss_factor(long double b, long double a, long double delta) {
  const CL q{delta, a};
  return std::sqrt(static_cast<long double>(M_PI) / q) * std::exp(-b * b / (4.0L * q));
}

// Same quantity by direct dense quadrature; used to certify gauss_factor at the
// exact parameters fed into the brute-force dispersive integrals below.
inline CL gauss_factor_direct(long double b, long double a, long double delta) {
  if (delta <= 0.0L) throw std::invalid_argument("gauss_factor_direct: delta must be positive");
  const long double L = 8.0L / std::sqrt(delta);
  const long double periods = std::fabs(a) * L * L / M_PI + std::fabs(b) * L / M_PI;
  const long n = std::max<long>(40000, static_cast<long>(700.0L * periods));
  auto f = [&](long double e) {
    const long double ph = b * e;
    return std::exp(-delta * e * e) * CL{std::cos(ph), std::sin(ph)} *
           CL{std::cos(a * e * e), -std::sin(a * e * e)};
  };
  return simpson(f, -L, L, n);
}

// Brute-force fundamental solution (antideriv=false) or its x-antiderivative
// (antideriv=true) of  u_t = eps * |Dx|^alpha u_x + dx^{-1} Laplace_perp u
// evaluated at (t, x, y[, z]); dim is the total space dimension (2 or 3).
// Transverse directions are reduced by the mollified complex-Gaussian factor
// (certified numerically above); the remaining frequency integral runs through
// integrate_halfline. The mollifier is removed by Richardson extrapolation.
inline OracleResult dispersive_bruteforce(int dim, bool antideriv, long double alpha, int eps,
                                          long double t, long double x, long double y,
                                          long double z = 0.0L, long double delta0 = 0.02L) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dispersive_bruteforce: dim must be 2 or 3");
  if (t <= 0.0L) throw std::invalid_argument("dispersive_bruteforce: t must be positive");

  // Certify the closed-form Gaussian factor at representative parameters.
  for (long double xi : {0.4L, 1.3L, 2.9L}) {
    for (long double dd : {delta0, 0.25L * delta0}) {
      const CL cf = gauss_factor(y, t / xi, dd);
      const CL dq = gauss_factor_direct(y, t / xi, dd);
      if (std::abs(cf - dq) > 1e-7L * (1.0L + std::abs(cf)))
        throw std::runtime_error("dispersive_bruteforce: gaussian factor certification failed");
    }
  }

  const int ntrans = dim - 1;
  // Endpoint power of the xi -> 0 limit: each transverse factor ~ sqrt(xi),
  // the antiderivative contributes 1/xi.
  const long double p = 0.5L * ntrans - (antideriv ? 1.0L : 0.0L);

  auto eval_at = [&](long double delta) -> OracleResult {
    HalfLineIntegrand f;
    f.p = p;
    f.phase = [=](long double xi) { return x * xi + eps * t * std::pow(xi, alpha + 1.0L); };
    f.dphase = [=](long double xi) {
      return x + eps * t * (alpha + 1.0L) * std::pow(xi, alpha);
    };
    f.rest = [=](long double xi) {
      CL amp = gauss_factor(y, t / xi, delta);
      if (ntrans == 2) amp *= gauss_factor(z, t / xi, delta);
      if (antideriv) amp /= CL{0.0L, xi};
      // divide out the xi^p carried by the integrand's power factor
      return amp * std::pow(xi, -p);
    };
    OracleResult r = integrate_halfline(f);
    const long double norm = std::pow(2.0L * M_PI, static_cast<long double>(-dim));
    r.value = norm * 2.0L * r.value.real();  // negative frequencies conjugate-mirror
    r.value.imag(0.0L);
    r.err *= norm * 2.0L;
    return r;
  };

  const OracleResult a1 = eval_at(delta0);
  const OracleResult a2 = eval_at(0.5L * delta0);
  const OracleResult a3 = eval_at(0.25L * delta0);
  const CL r1 = 2.0L * a2.value - a1.value;
  const CL r2 = 2.0L * a3.value - a2.value;
  const CL extrap = (4.0L * r2 - r1) / 3.0L;
  OracleResult out;
  out.value = extrap;
  out.err = std::abs(extrap - r2) + a3.err;
  return out;
}

}  // namespace kpmass::testing
