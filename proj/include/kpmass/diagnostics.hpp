// Diagnostics over computed fields and trajectories: symmetric partial
// masses and their telescoping identity against the antiderivative field,
// torus Hamiltonians with the zero-x-mean gate, oscillation-envelope decay
// fits, and PDE residuals of the differentiated equation.
//
// Conventions shared with the evolution module:
//   - lattices are uniform; spectral operators use mode_freq (period n*h),
//   - the x-antiderivative weight 1/(i xi) never appears here: residuals use
//     the differentiated equation form, which is constraint-free, and the
//     Hamiltonians divide by i*xi only after rejecting fields whose x-line
//     masses exceed 1e-10 (the evaluator operationalizes the constraint),
//   - the xi = 0 plane and the unsigned Nyquist rows are projected out of
//     spectral stencils.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpmass/evolve.hpp"
#include "kpmass/fields.hpp"
#include "kpmass/kernels.hpp"

namespace kpmass::diagnostics {

namespace detail {

// Nearest grid index of `v` on `ax`; throws unless it lies on a node.
inline std::size_t grid_line_index(const fields::Axis& ax, double v, const char* who) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": not finite");
  const double h = ax.n > 1 ? ax.step() : 1.0;
  const double pos = (v - ax.min) / h;
  const double rounded = std::round(pos);
  if (rounded < 0.0 || rounded >= double(ax.n) ||
      std::fabs(pos - rounded) > 1e-9 * (std::fabs(pos) + 1.0))
    throw std::invalid_argument(std::string(who) + ": not a grid line");
  return std::size_t(rounded);
}

// Integral of the piecewise-linear interpolant of row j over [lo, hi].
inline double row_integral(const fields::Field2D& f, std::size_t j, double lo, double hi) {
  const fields::Axis& ax = f.x;
  const double h = ax.step();
  auto value_at = [&](double x) {
    const double pos = (x - ax.min) / h;
    const std::size_t i0 = std::min(std::size_t(std::max(0.0, std::floor(pos))), ax.n - 2);
    const double s = (x - ax.coord(i0)) / h;
    return (1.0 - s) * f.at(i0, j) + s * f.at(i0 + 1, j);
  };
  // interior nodes strictly inside (lo, hi)
  const std::ptrdiff_t ilo = std::ptrdiff_t(std::ceil((lo - ax.min) / h - 1e-12));
  const std::ptrdiff_t ihi = std::ptrdiff_t(std::floor((hi - ax.min) / h + 1e-12));
  if (ilo > ihi) {  // both ends inside one cell
    return 0.5 * (hi - lo) * (value_at(lo) + value_at(hi));
  }
  const std::size_t a = std::size_t(std::max<std::ptrdiff_t>(ilo, 0));
  const std::size_t b = std::size_t(std::min<std::ptrdiff_t>(ihi, std::ptrdiff_t(ax.n) - 1));
  double acc = 0.0;
  for (std::size_t i = a; i + 1 <= b; ++i) acc += 0.5 * h * (f.at(i, j) + f.at(i + 1, j));
  // fractional end segments
  const double la = ax.coord(a), lb = ax.coord(b);
  if (la > lo) acc += 0.5 * (la - lo) * (value_at(lo) + f.at(a, j));
  if (hi > lb) acc += 0.5 * (hi - lb) * (f.at(b, j) + value_at(hi));
  return acc;
}

}  // namespace detail

// Symmetric partial mass P = integral of u(., y) over [-X, X], trapezoidal on
// the sampled line with linearly interpolated endpoints. X must lie inside
// the window and y on a grid line.
inline double partial_mass(const fields::Field2D& f, double X, double y) {
  fields::validate(f.x, "partial_mass.x");
  fields::validate(f.y, "partial_mass.y");
  if (f.x.n < 2) throw std::invalid_argument("partial_mass: need at least two x nodes");
  if (!(X > 0.0) || !std::isfinite(X))
    throw std::invalid_argument("partial_mass: X must be positive and finite");
  if (-X < f.x.min || X > f.x.max)
    throw std::invalid_argument("partial_mass: X outside window");
  const std::size_t j = detail::grid_line_index(f.y, y, "partial_mass: y");
  return detail::row_integral(f, j, -X, X);
}

// Partial-mass table of one recorded time, with the telescoping gap
// |P(X, y) - [a(X, y) - a(-X, y)]| against the recorded antiderivative
// companion when the run carries one. Entries whose gap exceeds
// 10 x error_budget are flagged.
struct MassReport {
  double t = 0.0;
  std::vector<double> y_slices;
  std::vector<double> X_values;
  std::vector<double> mass;      // [iy * X_values.size() + ix]
  std::vector<double> gap;       // same layout; empty when no companion
  std::vector<char> flagged;     // same layout as gap
  double error_budget = 0.0;

  double mass_at(std::size_t ix, std::size_t iy) const {
    return mass[iy * X_values.size() + ix];
  }
  double gap_at(std::size_t ix, std::size_t iy) const {
    return gap[iy * X_values.size() + ix];
  }

  // CSV columns: t, y, X, P, gap (gap blank when no companion was recorded).
  void to_csv(std::ostream& os) const {
    os << "t,y,X,P,gap\n";
    char buf[160];
    for (std::size_t iy = 0; iy < y_slices.size(); ++iy)
      for (std::size_t ix = 0; ix < X_values.size(); ++ix) {
        if (gap.empty())
          std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,\n", t, y_slices[iy],
                        X_values[ix], mass_at(ix, iy));
        else
          std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                        y_slices[iy], X_values[ix], mass_at(ix, iy), gap_at(ix, iy));
        os << buf;
      }
  }
};

// Builds the MassReport for run.fields[time_index]. X_values must be strictly
// increasing; slices run in parallel.
inline MassReport mass_report(const evolve::SolutionTrajectory& run,
                              std::size_t time_index, std::vector<double> X_values,
                              std::vector<double> y_slices, double error_budget = 1e-6,
                              int threads = 1) {
  if (time_index >= run.fields.size())
    throw std::invalid_argument("mass_report: time_index out of range");
  if (X_values.empty() || y_slices.empty())
    throw std::invalid_argument("mass_report: X_values and y_slices must be nonempty");
  for (std::size_t k = 0; k + 1 < X_values.size(); ++k)
    if (!(X_values[k] < X_values[k + 1]))
      throw std::invalid_argument("mass_report: X_values must be strictly increasing");
  const fields::Field2D& u = run.fields[time_index];
  const bool has_a = time_index < run.antiderivatives.size() &&
                     !run.antiderivatives[time_index].v.empty();
  const fields::Field2D* a = has_a ? &run.antiderivatives[time_index] : nullptr;

  MassReport rep;
  rep.t = run.times[time_index];
  rep.y_slices = std::move(y_slices);
  rep.X_values = std::move(X_values);
  rep.mass.assign(rep.y_slices.size() * rep.X_values.size(), 0.0);
  rep.error_budget = error_budget;
  if (has_a) {
    rep.gap.assign(rep.mass.size(), 0.0);
    rep.flagged.assign(rep.mass.size(), 0);
  }
  const std::size_t nX = rep.X_values.size();
  kernels::detail::parallel_rows(rep.y_slices.size(), threads, [&](std::size_t iy) {
    const double y = rep.y_slices[iy];
    const std::size_t j = detail::grid_line_index(u.y, y, "mass_report: y");
    for (std::size_t ix = 0; ix < nX; ++ix) {
      const double X = rep.X_values[ix];
      if (!(X > 0.0) || -X < u.x.min || X > u.x.max)
        throw std::invalid_argument("mass_report: X outside window");
      const double P = detail::row_integral(u, j, -X, X);
      rep.mass[iy * nX + ix] = P;
      if (has_a) {
        // a is sampled on the same lattice; interpolate at the two endpoints
        const fields::Axis& ax = a->x;
        auto value_at = [&](double x) {
          const double h = ax.step();
          const double pos = (x - ax.min) / h;
          const std::size_t i0 =
              std::min(std::size_t(std::max(0.0, std::floor(pos))), ax.n - 2);
          const double s = (x - ax.coord(i0)) / h;
          return (1.0 - s) * a->at(i0, j) + s * a->at(i0 + 1, j);
        };
        const double g = std::fabs(P - (value_at(X) - value_at(-X)));
        rep.gap[iy * nX + ix] = g;
        rep.flagged[iy * nX + ix] = g > 10.0 * error_budget ? 1 : 0;
      }
    }
  });
  return rep;
}

namespace detail {

// Common spectral scaffolding for the torus functionals below.
struct SpectralField {
  std::size_t nx, ny;
  double hx, hy;
  std::vector<std::complex<double>> hat;  // unnormalized forward DFT

  SpectralField(const fields::Field2D& f)
      : nx(f.x.n), ny(f.y.n), hx(f.x.step()), hy(f.y.step()) {
    if (nx < 4 || ny < 4)
      throw std::invalid_argument("diagnostics: grid must be at least 4x4");
    evolve::detail::Fft2D fft(nx, ny);
    std::complex<double>* d = fft.data();
    for (std::size_t k = 0; k < nx * ny; ++k) d[k] = {f.v[k], 0.0};
    fft.forward();
    hat.assign(d, d + nx * ny);
  }
};

// Throws when any x-line mass exceeds the gate; the offending mass is
// reported in the message.
inline void require_zero_line_mass(const fields::Field2D& f, const char* who) {
  const double h = f.x.step();
  double worst = 0.0;
  for (std::size_t j = 0; j < f.y.n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.x.n; ++i) acc += f.at(i, j);
    worst = std::max(worst, std::fabs(acc * h));
  }
  if (worst > 1e-10) {
    std::ostringstream os;
    os << who << ": field has nonzero x-line mass " << worst
       << " (> 1e-10); project the xi = 0 plane first";
    throw std::invalid_argument(os.str());
  }
}

struct QuadraticTerms {
  double dispersion = 0.0;  // integral of u L u
  double transverse = 0.0;  // integral of (dx^{-1} u_y)^2
  double l2 = 0.0;          // integral of u^2
  double cubic = 0.0;       // integral of u^3 / 3
};

inline QuadraticTerms hamiltonian_terms(const fields::Field2D& f, double alpha,
                                        int epsilon) {
  const SpectralField s(f);
  const double norm = (s.hx * s.hy) / double(s.nx * s.ny);
  QuadraticTerms q;
  for (std::size_t j = 0; j < s.ny; ++j) {
    const double eta = evolve::detail::mode_freq(j, s.ny, s.hy);
    for (std::size_t i = 0; i < s.nx; ++i) {
      const double xi = evolve::detail::mode_freq(i, s.nx, s.hx);
      const double e2 = std::norm(s.hat[j * s.nx + i]);
      q.dispersion += epsilon * std::pow(std::fabs(xi), alpha) * e2 * norm;
      if (xi != 0.0) q.transverse += (eta / xi) * (eta / xi) * e2 * norm;
    }
  }
  for (double v : f.v) {
    q.l2 += v * v;
    q.cubic += v * v * v / 3.0;
  }
  q.l2 *= s.hx * s.hy;
  q.cubic *= s.hx * s.hy;
  return q;
}

}  // namespace detail

// Torus Hamiltonian (1/2) * integral of [-u L u + (dx^{-1} u_y)^2 + u^2 +
// u^3/3], with L the x multiplier epsilon |xi|^alpha. Rejects fields whose
// x-line masses exceed 1e-10: outside the zero-x-mean class the transverse
// term is undefined.
inline double hamiltonian_kp(const fields::Field2D& f, const kernels::DispersionSpec& s) {
  kernels::validate(s);
  if (s.family != kernels::Family::kp)
    throw std::invalid_argument("hamiltonian_kp: spec.family must be kp");
  detail::require_zero_line_mass(f, "hamiltonian_kp");
  const detail::QuadraticTerms q = detail::hamiltonian_terms(f, s.alpha, s.epsilon);
  return 0.5 * (-q.dispersion + q.transverse + q.l2 + q.cubic);
}

// Torus Hamiltonian (1/2) * integral of [(dx^{-1} u_y)^2 + u^2 + u^3/3] of
// the weighted (BBM) family; same zero-x-mean gate.
inline double hamiltonian_bbm(const fields::Field2D& f,
                              const kernels::DispersionSpec& s) {
  kernels::validate(s);
  if (s.family != kernels::Family::kp_bbm)
    throw std::invalid_argument("hamiltonian_bbm: spec.family must be kp_bbm");
  detail::require_zero_line_mass(f, "hamiltonian_bbm");
  const detail::QuadraticTerms q = detail::hamiltonian_terms(f, s.alpha, s.epsilon);
  return 0.5 * (q.transverse + q.l2 + q.cubic);
}

// Least-squares decay exponent of an oscillatory magnitude profile. The
// running-max envelope is taken over oscillation arches (one local period,
// estimated from the interior maxima of the profile itself); monotone
// profiles fall back to a pointwise fit, so an exact power law is recovered
// to machine precision.
struct EnvelopeFit {
  double exponent = 0.0;
  std::vector<std::pair<double, double>> envelope;  // (|lambda|, peak)

  void to_csv(std::ostream& os) const {
    os << "abs_lambda,envelope\n";
    char buf[80];
    for (const auto& [lam, v] : envelope) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", lam, v);
      os << buf;
    }
  }
};

inline EnvelopeFit decay_envelope(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 20)
    throw std::invalid_argument("decay_envelope: need at least 20 samples");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.first) < std::fabs(b.first);
  });
  for (const auto& [lam, v] : samples)
    if (!(std::fabs(lam) > 0.0) || !(v >= 0.0) || !std::isfinite(lam) || !std::isfinite(v))
      throw std::invalid_argument("decay_envelope: samples must be finite, lambda nonzero");
  const double span = std::fabs(samples.back().first) / std::fabs(samples.front().first);
  if (!(span >= 10.0))
    throw std::invalid_argument("decay_envelope: samples must span at least one decade");

  // interior maxima mark arch peaks; a profile with none is monotone
  EnvelopeFit fit;
  for (std::size_t k = 1; k + 1 < samples.size(); ++k)
    if (samples[k].second > samples[k - 1].second &&
        samples[k].second >= samples[k + 1].second)
      fit.envelope.emplace_back(std::fabs(samples[k].first), samples[k].second);
  if (fit.envelope.size() < 5) {
    fit.envelope.clear();
    for (const auto& [lam, v] : samples) fit.envelope.emplace_back(std::fabs(lam), v);
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t used = 0;
  for (const auto& [lam, v] : fit.envelope) {
    if (!(v > 0.0)) continue;  // zeros cannot enter the log fit
    const double lx = std::log(lam), ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++used;
  }
  if (used < 5) throw std::invalid_argument("decay_envelope: too few positive envelope points");
  const double n = double(used);
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

// Max-norm residual of the differentiated equation at each interior recorded
// time, using central time differences and spectral space derivatives:
//   kp:     dx(u_t) - eps dx^2 |Dx|^alpha u + dx^2(u^2/2) + dy^2 u
//   kp_bbm: dx((1 + |Dx|^alpha) u_t) + dx^2(u + u^2/2) + dy^2 u
// The differentiated form needs no x-antiderivative, so no constraint is
// imposed on the trajectory; the xi = 0 plane (pure line-mass content, which
// the differentiated equation does not constrain) and the unsigned Nyquist
// rows are projected out of the stencil.
struct ResidualReport {
  std::vector<double> times;   // interior recorded times
  std::vector<double> values;  // max-norm residual at each
};

inline ResidualReport residual(const evolve::SolutionTrajectory& run,
                               const kernels::DispersionSpec& spec,
                               bool include_nonlinear = true, int threads = 1) {
  kernels::validate(spec);
  if (run.times.size() < 3)
    throw std::invalid_argument("residual: need at least 3 recorded times");
  if (run.fields.size() != run.times.size())
    throw std::invalid_argument("residual: trajectory is missing fields");
  const std::size_t nx = run.fields[0].x.n, ny = run.fields[0].y.n;
  if (nx < 4 || ny < 4) throw std::invalid_argument("residual: grid must be at least 4x4");
  const double hx = run.fields[0].x.step(), hy = run.fields[0].y.step();
  const bool bbm = spec.family == kernels::Family::kp_bbm;

  ResidualReport rep;
  rep.times.assign(run.times.begin() + 1, run.times.end() - 1);
  rep.values.assign(rep.times.size(), 0.0);

  kernels::detail::parallel_rows(rep.times.size(), threads, [&](std::size_t r) {
    const std::size_t i = r + 1;
    const fields::Field2D& u = run.fields[i];
    const fields::Field2D& um = run.fields[i - 1];
    const fields::Field2D& up = run.fields[i + 1];
    const double dt2 = run.times[i + 1] - run.times[i - 1];

    evolve::detail::Fft2D fft(nx, ny);
    std::complex<double>* d = fft.data();
    auto forward = [&](auto&& fill) {
      for (std::size_t k = 0; k < nx * ny; ++k) d[k] = {fill(k), 0.0};
      fft.forward();
      return std::vector<std::complex<double>>(d, d + nx * ny);
    };
    const auto ut_hat = forward([&](std::size_t k) { return (up.v[k] - um.v[k]) / dt2; });
    const auto u_hat = forward([&](std::size_t k) { return u.v[k]; });
    std::vector<std::complex<double>> w_hat;
    if (include_nonlinear)
      w_hat = forward([&](std::size_t k) { return 0.5 * u.v[k] * u.v[k]; });

    for (std::size_t j = 0; j < ny; ++j) {
      const double eta = evolve::detail::mode_freq(j, ny, hy);
      const bool ny_nyq = (ny % 2 == 0) && (j == ny / 2);
      for (std::size_t ii = 0; ii < nx; ++ii) {
        const double xi = evolve::detail::mode_freq(ii, nx, hx);
        const bool nx_nyq = (nx % 2 == 0) && (ii == nx / 2);
        const std::size_t k = j * nx + ii;
        if (xi == 0.0 || nx_nyq || ny_nyq) {
          d[k] = 0.0;
          continue;
        }
        const std::complex<double> ixi{0.0, xi};
        const double xi2 = xi * xi;
        std::complex<double> R;
        if (!bbm) {
          R = ixi * ut_hat[k] +
              (spec.epsilon * xi2 * std::pow(std::fabs(xi), spec.alpha) - eta * eta) *
                  u_hat[k];
        } else {
          R = ixi * (1.0 + std::pow(std::fabs(xi), spec.alpha)) * ut_hat[k] -
              (xi2 + eta * eta) * u_hat[k];
        }
        if (include_nonlinear) R -= xi2 * w_hat[k];
        d[k] = R;
      }
    }
    fft.backward();
    double worst = 0.0;
    const double norm = 1.0 / double(nx * ny);
    for (std::size_t k = 0; k < nx * ny; ++k)
      worst = std::max(worst, std::fabs(d[k].real() * norm));
    rep.values[r] = worst;
  });
  return rep;
}

}  // namespace kpmass::diagnostics
