// Propagators for the planar dispersive families.
//
//   linear_apply   discrete convolution of an initial datum against the
//                  sampled kernel pair (G, A): the linear solution together
//                  with its x-antiderivative companion. Sampling the kernel
//                  at lattice differences is spectrally accurate for smooth
//                  localized data: the multiplier has constant modulus, so
//                  the aliasing error is bounded by the datum's own spectral
//                  tail, independent of how fast the kernel oscillates.
//   duhamel_solve  fixed-point iteration of u = S(t) phi - int S(t-s) u u_x,
//                  with the antiderivative kernel absorbing one x-derivative
//                  and a Gauss rule built for the weakly singular s-weight.
//   bbm_solve      the same scheme for the bounded-multiplier family, whose
//                  kernels carry a Sobolev weight of order 2k and whose
//                  nonlinearity gains the matching (I - dxx)^k factor.
//   spectral_step  exact-multiplier exponential two-stage step on a torus,
//                  restricted to fields with zero x-mean on every y line.
//
// The dispersive kernels reduce to 1D profiles of the similarity variable
// lambda, so one pair of Chebyshev tables serves every elapsed time of a
// convolution run. The bounded-multiplier kernels have no such reduction and
// are sampled pointwise.
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kpmass/constants.hpp"
#include "kpmass/fields.hpp"
#include "kpmass/kernels.hpp"
#include "kpmass/oscquad.hpp"

namespace kpmass::evolve {

namespace detail {

// max-reduction usable from concurrent kernel fills
class AtomicMax {
 public:
  void update(double v) {
    double cur = bits_.load(std::memory_order_relaxed);
    while (v > cur && !bits_.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
    }
  }
  double value() const { return bits_.load(std::memory_order_relaxed); }

 private:
  std::atomic<double> bits_{0.0};
};

// angular frequency of mode i on an n-point grid with sample step h; the
// implied period is n h (one step past the last sample)
inline double mode_freq(std::size_t i, std::size_t n, double h) {
  const long k = static_cast<long>(i) <= static_cast<long>(n / 2)
                     ? static_cast<long>(i)
                     : static_cast<long>(i) - static_cast<long>(n);
  return 2.0 * double(kPi) * static_cast<double>(k) / (static_cast<double>(n) * h);
}

// In-place 2D complex FFT pair on a row-major buffer with x fastest. Plans
// are created on the calling thread; execution of distinct Fft2D objects is
// independent, but one object must not be used from two threads at once.
class Fft2D {
 public:
  Fft2D(std::size_t nx, std::size_t ny)
      : nx_(nx), ny_(ny), buf_(nx * ny, std::complex<double>{0.0, 0.0}) {
    if (nx_ < 2 || ny_ < 2) throw std::invalid_argument("Fft2D: need nx, ny >= 2");
    auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_2d(static_cast<int>(ny_), static_cast<int>(nx_), p, p, FFTW_FORWARD,
                            FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(static_cast<int>(ny_), static_cast<int>(nx_), p, p, FFTW_BACKWARD,
                            FFTW_ESTIMATE);
    if (fwd_ == nullptr || bwd_ == nullptr) throw std::runtime_error("Fft2D: plan creation failed");
  }
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;
  ~Fft2D() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::complex<double>* data() { return buf_.data(); }
  void zero() { std::fill(buf_.begin(), buf_.end(), std::complex<double>{0.0, 0.0}); }
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }  // unnormalized: scale by 1/(nx ny) after

 private:
  std::size_t nx_, ny_;
  std::vector<std::complex<double>> buf_;
  fftw_plan fwd_, bwd_;
};

// x-only spectral multiplier applied to a real field: Re IFFT(m(xi) FFT(f))
inline fields::Field2D apply_x_multiplier(Fft2D& fft, const fields::Field2D& f,
                                          const std::vector<std::complex<double>>& m) {
  const std::size_t nx = f.x.n, ny = f.y.n;
  if (fft.nx() != nx || fft.ny() != ny || m.size() != nx)
    throw std::logic_error("apply_x_multiplier: dimension mismatch");
  std::complex<double>* b = fft.data();
  for (std::size_t q = 0; q < nx * ny; ++q) b[q] = f.v[q];
  fft.forward();
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) b[j * nx + i] *= m[i];
  fft.backward();
  fields::Field2D out(f.x, f.y);
  const double inv = 1.0 / static_cast<double>(nx * ny);
  for (std::size_t q = 0; q < nx * ny; ++q) out.v[q] = b[q].real() * inv;
  return out;
}

// multiplier i xi (1 + xi^2)^smoothing_order, the transform of
// d/dx (I - dxx)^smoothing_order; the unpaired Nyquist mode is zeroed so the
// image of a real field stays real
inline std::vector<std::complex<double>> x_deriv_multiplier(std::size_t nx, double hx,
                                                            double smoothing_order = 0.0) {
  std::vector<std::complex<double>> m(nx, std::complex<double>{0.0, 0.0});
  for (std::size_t i = 0; i < nx; ++i) {
    if (nx % 2 == 0 && i == nx / 2) continue;
    const double xi = mode_freq(i, nx, hx);
    double amp = xi;
    if (smoothing_order != 0.0) amp *= std::pow(1.0 + xi * xi, smoothing_order);
    m[i] = std::complex<double>{0.0, amp};
  }
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gauss rule for the endpoint-singular Duhamel weight
// ---------------------------------------------------------------------------

struct JacobiRule {
  std::vector<double> nodes;    // interior points of (0, 1), increasing
  std::vector<double> weights;  // positive; they sum to 1/(1 - gamma)
  double gamma = 0.0;
};

namespace detail {

// Symmetric tridiagonal QL with implicit shifts, tracking only the first
// component of each eigenvector (the quadrature construction needs nothing
// else). d holds the diagonal and returns the eigenvalues; e holds the
// subdiagonal in e[0..n-2]; z enters as the first coordinate basis row and
// returns the first row of the eigenvector matrix.
inline void tridiag_eigen_first_row(std::vector<double>& d, std::vector<double>& e,
                                    std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.resize(static_cast<std::size_t>(n), 0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd + 1e-300) break;
      }
      if (m != l) {
        if (++iter == 60) throw std::runtime_error("gauss_jacobi: eigenvalue iteration stalled");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          const double zi = z[i + 1];
          z[i + 1] = s * z[i] + c * zi;
          z[i] = c * z[i] - s * zi;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

// Gauss rule for int_0^1 v^{-gamma} f(v) dv, exact whenever f is a polynomial
// of degree <= 2n - 1. Built from the three-term recurrence of the Jacobi
// weight (1 + x)^{-gamma} on [-1, 1] by the eigenvalue method.
inline JacobiRule gauss_jacobi(int n, double gamma) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_jacobi: need 1 <= n <= 64");
  if (!std::isfinite(gamma) || gamma < 0.0 || !(gamma < 1.0))
    throw std::invalid_argument("gauss_jacobi: need 0 <= gamma < 1");
  const double b = -gamma;
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  z[0] = 1.0;
  d[0] = b / (b + 2.0);
  for (int k = 1; k < n; ++k) {
    const double tkb = 2.0 * k + b;
    d[static_cast<std::size_t>(k)] = b * b / (tkb * (tkb + 2.0));
    const double beta =
        4.0 * k * k * (k + b) * (k + b) / (tkb * tkb * (tkb + 1.0) * (tkb - 1.0));
    e[static_cast<std::size_t>(k - 1)] = std::sqrt(beta);
  }
  detail::tridiag_eigen_first_row(d, e, z);
  const double mu0 = std::pow(2.0, 1.0 - gamma) / (1.0 - gamma);
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) { return d[u] < d[v]; });
  JacobiRule rule;
  rule.gamma = gamma;
  rule.nodes.reserve(order.size());
  rule.weights.reserve(order.size());
  const double half_pow = std::pow(2.0, gamma - 1.0);
  for (std::size_t i : order) {
    rule.nodes.push_back(0.5 * (1.0 + d[i]));
    rule.weights.push_back(half_pow * mu0 * z[i] * z[i]);
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

enum class DatumKind { gaussian, dipole };

// Smooth localized initial data with closed-form line masses, so the mass
// diagnostics have exact references. The dipole is the x-derivative of the
// gaussian envelope: every x line carries zero mass exactly.
struct InitialDatum {
  DatumKind kind = DatumKind::gaussian;
  double amplitude = 1.0;
  double width_x = 1.0, width_y = 1.0;
  double center_x = 0.0, center_y = 0.0;
  fields::Field2D field;  // samples on the working grid

  double eval(double x, double y) const {
    const double gx = (x - center_x) / width_x, gy = (y - center_y) / width_y;
    const double g = amplitude * std::exp(-gx * gx - gy * gy);
    return kind == DatumKind::gaussian ? g : -2.0 * (x - center_x) / (width_x * width_x) * g;
  }

  // integral of the datum along the x line at height y
  double x_line_mass(double y) const {
    if (kind == DatumKind::dipole) return 0.0;
    const double gy = (y - center_y) / width_y;
    return amplitude * std::sqrt(double(kPi)) * width_x * std::exp(-gy * gy);
  }

  // integral of |datum| over the plane
  double total_abs_mass() const {
    const double s = std::fabs(amplitude) * std::sqrt(double(kPi)) * width_y;
    if (kind == DatumKind::gaussian) return s * std::sqrt(double(kPi)) * width_x;
    return 2.0 * s;  // the two lobes of the differentiated gaussian
  }
};

inline InitialDatum make_datum(DatumKind kind, double amplitude, double width_x, double width_y,
                               double center_x, double center_y, const fields::Axis& ax,
                               const fields::Axis& ay) {
  if (!(width_x > 0.0) || !(width_y > 0.0))
    throw std::invalid_argument("make_datum: widths must be positive");
  if (!std::isfinite(amplitude) || !std::isfinite(center_x) || !std::isfinite(center_y))
    throw std::invalid_argument("make_datum: parameters must be finite");
  InitialDatum d{kind, amplitude, width_x, width_y, center_x, center_y,
                 fields::Field2D(ax, ay)};
  for (std::size_t j = 0; j < ay.n; ++j)
    for (std::size_t i = 0; i < ax.n; ++i) d.field.at(i, j) = d.eval(ax.coord(i), ay.coord(j));
  return d;
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

enum class EvolveMethod { duhamel_picard, spectral_torus };

struct SolutionTrajectory {
  kernels::DispersionSpec spec;
  EvolveMethod method = EvolveMethod::duhamel_picard;
  std::vector<double> times;            // times[0] = initial time
  std::vector<fields::Field2D> fields;  // fields[0] = initial datum samples
  // x-antiderivative companions, d/dx a(t) = u(t); entry 0 is left empty and
  // the spectral method records none
  std::vector<fields::Field2D> antiderivatives;
  // fixed-point residual history per recorded time (entry 0 empty); the last
  // residual of every time is below the requested tolerance
  std::vector<std::vector<double>> picard_residuals;
};

// ---------------------------------------------------------------------------
// Kernel profile tables
// ---------------------------------------------------------------------------

namespace detail {

// stationary phase of the half-line profile integral at |lambda| = a
inline double profile_phase(double alpha, double a) {
  return alpha * std::pow(alpha + 1.0, -(alpha + 1.0) / alpha) * std::pow(a, (alpha + 1.0) / alpha);
}

// local oscillation rate d(phase)/d(lambda) ~ stationary abscissa at |lambda| = a
inline double profile_rate(double alpha, double a) {
  return std::pow(std::max(a, 1.0) / (alpha + 1.0), 1.0 / alpha);
}

// On the side with no real stationary point the profiles decay like
// exp(-profile_phase): past this lambda they are smaller than 1e-30 times
// their peak, far below every tolerance in use, while each quadrature there
// still costs a full oscillatory integral. Tables flush that tail to zero.
inline double decay_flush_lambda(double alpha) {
  const double c = alpha * std::pow(alpha + 1.0, -(alpha + 1.0) / alpha);
  return std::pow(70.0 / c, alpha / (alpha + 1.0));
}

// table feasibility gate: total oscillatory phase a table may span
inline const double kMaxTablePhase = 2.0e5;

// Initial segmentation for the profile tables: panels of a fixed phase budget
// on the oscillatory side, geometric panels on the smooth side. Deterministic
// and independent of the thread count.
inline std::vector<double> line_breakpoints(double alpha, int epsilon, double lo, double hi) {
  const double osc_extreme = epsilon > 0 ? std::max(0.0, -lo) : std::max(0.0, hi);
  if (profile_phase(alpha, osc_extreme) > kMaxTablePhase)
    throw std::runtime_error(
        "build_kernel_line: the oscillatory side of the requested range needs more phase "
        "resolution than the table budget; shrink the window or the elapsed-time spread");
  std::vector<double> pts{lo, hi};
  if (lo < 0.0 && hi > 0.0) pts.push_back(0.0);
  for (double w = 1.0; w < std::max(std::fabs(lo), std::fabs(hi)); w *= 2.0) {
    if (-w > lo) pts.push_back(-w);
    if (w < hi) pts.push_back(w);
  }
  const double sgn = epsilon > 0 ? -1.0 : 1.0;
  // 10 radians of phase per panel: under two oscillation periods, which the
  // degree-16 interpolant resolves below table tolerance; adaptive bisection
  // inside build_segmented still splits any panel whose tail check fails
  double cur = 0.0;
  while (true) {
    const double step = 10.0 / profile_rate(alpha, std::fabs(cur));
    cur += sgn * std::min(step, 8.0);
    if (epsilon > 0 ? cur <= lo : cur >= hi) break;
    if (cur > lo && cur < hi) pts.push_back(cur);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  const double tiny = (hi - lo) * 1e-12;
  for (double p : pts)
    if (out.empty() || p - out.back() > tiny) out.push_back(p);
  out.back() = hi;
  return out;
}

}  // namespace detail

// Chebyshev tables of the two kernel profiles over one lambda interval:
// g holds the G profile (the kernel with its time prefactor stripped) and
// a holds the A profile. One line serves every elapsed time of a solve
// because the similarity variable absorbs t. On the no-saddle side the build
// range stops at the flush point and lookups beyond it return zero.
struct KernelLine {
  double alpha = 2.0;
  int epsilon = +1;
  kernels::KernelTable g;
  kernels::KernelTable a;
  double node_error = 0.0;  // worst quadrature error estimate among table nodes
  bool converged = true;    // every node quadrature converged

  double lo() const { return g.lo(); }
  double hi() const { return g.hi(); }

  double g_at(double lam) const {
    if (epsilon > 0 ? lam > g.hi() : lam < g.lo()) return 0.0;  // flushed decay tail
    return g(lam);
  }
  double a_at(double lam) const {
    if (epsilon > 0 ? lam > a.hi() : lam < a.lo()) return 0.0;
    return a(lam);
  }

  // true when lookups over [lam_lo, lam_hi] are exact or flushed-as-zero
  bool covers(double lam_lo, double lam_hi) const {
    const double cap = detail::decay_flush_lambda(alpha);
    const double tol = 1e-9 * (hi() - lo());
    if (epsilon > 0) return lo() <= lam_lo + tol && hi() >= std::min(lam_hi, cap) - tol;
    return hi() >= lam_hi - tol && lo() <= std::max(lam_lo, -cap) + tol;
  }
};

inline KernelLine build_kernel_line(double alpha, int epsilon, double lam_lo, double lam_hi,
                                    const oscquad::QuadratureConfig& cfg = {}, int threads = 1,
                                    double tol = 3e-12) {
  if (!(alpha > 0.5)) throw std::invalid_argument("build_kernel_line: alpha must exceed 1/2");
  if (epsilon != 1 && epsilon != -1)
    throw std::invalid_argument("build_kernel_line: epsilon must be +1 or -1");
  if (!std::isfinite(lam_lo) || !std::isfinite(lam_hi) || !(lam_lo < lam_hi))
    throw std::invalid_argument("build_kernel_line: need finite lam_lo < lam_hi");
  if (threads < 1) throw std::invalid_argument("build_kernel_line: threads must be >= 1");
  // pad so lattice round-off cannot step outside the tables, then stop the
  // decay side at the flush point
  const double pad = 1e-6 * (lam_hi - lam_lo) + 1e-9;
  double blo = lam_lo - pad, bhi = lam_hi + pad;
  const double cap = detail::decay_flush_lambda(alpha);
  if (epsilon > 0)
    bhi = std::min(bhi, cap);
  else
    blo = std::max(blo, -cap);
  if (!(blo < bhi)) throw std::invalid_argument("build_kernel_line: empty range after flushing");
  const std::vector<double> pts = detail::line_breakpoints(alpha, epsilon, blo, bhi);

  KernelLine line;
  line.alpha = alpha;
  line.epsilon = epsilon;
  detail::AtomicMax errmax;
  std::atomic<bool> ok{true};
  line.g = kernels::KernelTable::build_segmented(
      [&](double lam) {
        const oscquad::EvalResult r = oscquad::eval_H(lam, alpha, cfg, epsilon);
        errmax.update(r.error);
        if (!r.converged) ok.store(false, std::memory_order_relaxed);
        return r.value.real();
      },
      pts, tol, threads);
  line.a = kernels::KernelTable::build_segmented(
      [&](double lam) {
        const oscquad::EvalResult r = oscquad::eval_F(lam, alpha, cfg, epsilon);
        errmax.update(r.error);
        if (!r.converged) ok.store(false, std::memory_order_relaxed);
        return r.value.imag();
      },
      pts, tol, threads);
  line.node_error = errmax.value();
  line.converged = ok.load();
  return line;
}

// ---------------------------------------------------------------------------
// Padded lattice convolution
// ---------------------------------------------------------------------------

namespace detail {

// Circular convolution on a zero-padded lattice, sized so that no wraparound
// can reach the physical window. Kernels are stored wrap-indexed by their
// difference offsets; all kernels here are even in the y offset and are
// evaluated on the dj >= 0 half only.
class Convolver {
 public:
  Convolver(const fields::Axis& x, const fields::Axis& y)
      : x_(x), y_(y), px_(padded(x.n)), py_(padded(y.n)), fft_(px_, py_) {
    fields::validate(x, "Convolver x axis");
    fields::validate(y, "Convolver y axis");
    if (x.n < 2 || y.n < 2) throw std::invalid_argument("Convolver: need nx, ny >= 2");
  }

  static std::size_t padded(std::size_t n) {
    std::size_t p = 1;
    while (p < 2 * n) p *= 2;
    return p;
  }

  std::size_t padded_size() const { return px_ * py_; }

  // Transform of the kernel sampled at difference offsets (di hx, dj hy) for
  // di in [dilo, dihi], |dj| <= djmax, zero outside. k(dx, dy) must be even
  // in dy and safe to call concurrently.
  template <class K>
  std::vector<std::complex<double>> kernel_hat(K&& k, long dilo, long dihi, long djmax,
                                               int threads) {
    if (dilo > dihi || djmax < 0) throw std::logic_error("Convolver: bad difference box");
    if (dihi >= static_cast<long>(x_.n) || -dilo >= static_cast<long>(x_.n) ||
        djmax >= static_cast<long>(y_.n))
      throw std::logic_error("Convolver: difference box exceeds the lattice");
    const double hx = x_.step(), hy = y_.step();
    std::vector<std::complex<double>> khat(px_ * py_, std::complex<double>{0.0, 0.0});
    kernels::detail::parallel_rows(static_cast<std::size_t>(djmax) + 1, threads,
                                   [&](std::size_t r) {
      const std::size_t rp = r;
      const std::size_t rm = (py_ - r) % py_;
      for (long di = dilo; di <= dihi; ++di) {
        const double kv = k(static_cast<double>(di) * hx, static_cast<double>(r) * hy);
        const std::size_t ci =
            static_cast<std::size_t>((di % static_cast<long>(px_) + static_cast<long>(px_)) %
                                     static_cast<long>(px_));
        khat[rp * px_ + ci] = kv;
        khat[rm * px_ + ci] = kv;
      }
    });
    std::copy(khat.begin(), khat.end(), fft_.data());
    fft_.forward();
    std::copy(fft_.data(), fft_.data() + px_ * py_, khat.begin());
    return khat;
  }

  // out(i, j) = hx hy sum_{i', j'} K((i-i') hx, (j-j') hy) phi(i', j')
  fields::Field2D apply(const std::vector<std::complex<double>>& khat,
                        const fields::Field2D& phi) {
    if (phi.x.n != x_.n || phi.y.n != y_.n || phi.x.min != x_.min || phi.y.min != y_.min)
      throw std::logic_error("Convolver: field lives on a different lattice");
    if (khat.size() != px_ * py_) throw std::logic_error("Convolver: kernel transform size");
    fft_.zero();
    std::complex<double>* b = fft_.data();
    for (std::size_t j = 0; j < y_.n; ++j)
      for (std::size_t i = 0; i < x_.n; ++i) b[j * px_ + i] = phi.at(i, j);
    fft_.forward();
    for (std::size_t q = 0; q < px_ * py_; ++q) b[q] *= khat[q];
    fft_.backward();
    const double scale = x_.step() * y_.step() / static_cast<double>(px_ * py_);
    fields::Field2D out(x_, y_);
    for (std::size_t j = 0; j < y_.n; ++j)
      for (std::size_t i = 0; i < x_.n; ++i) out.at(i, j) = b[j * px_ + i].real() * scale;
    return out;
  }

 private:
  fields::Axis x_, y_;
  std::size_t px_, py_;
  Fft2D fft_;
};

struct SupportBox {
  std::size_t i0 = 0, i1 = 0, j0 = 0, j1 = 0;
  double peak = 0.0;
};

// bounding box of the samples above rel_tol times the peak magnitude
inline SupportBox support_box(const fields::Field2D& f, double rel_tol) {
  SupportBox b;
  for (double v : f.v) b.peak = std::max(b.peak, std::fabs(v));
  if (b.peak == 0.0) return b;
  const double thr = rel_tol * b.peak;
  b.i0 = f.x.n;
  b.j0 = f.y.n;
  for (std::size_t j = 0; j < f.y.n; ++j)
    for (std::size_t i = 0; i < f.x.n; ++i)
      if (std::fabs(f.at(i, j)) > thr) {
        b.i0 = std::min(b.i0, i);
        b.i1 = std::max(b.i1, i);
        b.j0 = std::min(b.j0, j);
        b.j1 = std::max(b.j1, j);
      }
  return b;
}

// Pointwise bounded-multiplier kernel fill with far-cone flushing. Entries
// whose phase coefficients exceed the caps lie far outside the oscillation
// cone, where the leading endpoint contributions of the two half-line pieces
// cancel and the kernels have decayed to O(lambda^{-3/2}) scale; they are
// flushed to zero and the analytic bound on the flushed magnitude is
// accumulated into the reported kernel error instead of being evaluated.
struct BbmLattice {
  const kernels::DispersionSpec* spec;
  kernels::KernelKind kind;
  double t;
  oscquad::QuadratureConfig quad;
  double lambda_cap, secondary_cap;
  AtomicMax* err;
  AtomicMax* flushed;
  std::atomic<bool>* ok;

  double operator()(double dx, double dy) const {
    const kernels::detail::BbmCoords c = kernels::detail::bbm_coords(t, dx, dy);
    if (c.lambda > lambda_cap || c.secondary > secondary_cap) {
      const double far = std::max(c.lambda, c.secondary);
      flushed->update(3.0 * double(kernels::kFresnelC) / std::sqrt(t) / std::pow(far, 1.5));
      return 0.0;
    }
    const kernels::KernelValue r = kind == kernels::KernelKind::G
                                       ? kernels::eval_G(*spec, t, dx, dy, quad)
                                       : kernels::eval_A(*spec, t, dx, dy, quad);
    err->update(r.error);
    if (!r.converged) ok->store(false, std::memory_order_relaxed);
    return r.value;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear evolution
// ---------------------------------------------------------------------------

struct LinearOptions {
  int threads = 1;
  oscquad::QuadratureConfig quad{};
  double table_tol = 3e-12;
  // samples at or below this fraction of the peak count as padding
  double support_rel_tol = 1e-12;
  // prebuilt profile tables (kp family); must cover the difference lattice
  const KernelLine* line = nullptr;
  // far-cone caps for the pointwise bounded-multiplier lattice
  double bbm_lambda_cap = 800.0;
  double bbm_secondary_cap = 800.0;
};

struct LinearApplyResult {
  fields::Field2D u;  // G * datum
  fields::Field2D a;  // A * datum, the x-antiderivative companion
  // largest kernel magnitude reachable at the window edge times the datum
  // L1 mass: an upper estimate of what the finite window cannot represent
  double boundary_contamination = 0.0;
  double kernel_error = 0.0;  // worst kernel table or point error estimate
  bool converged = true;
};

inline LinearApplyResult linear_apply(const kernels::DispersionSpec& spec,
                                      const InitialDatum& datum, double t,
                                      const LinearOptions& opt = {}) {
  kernels::validate(spec);
  if (spec.transverse_dim != 1)
    throw std::invalid_argument("linear_apply: planar kernels only");
  if (!std::isfinite(t) || !(t > 0.0))
    throw std::invalid_argument("linear_apply: t must be positive");
  if (opt.threads < 1) throw std::invalid_argument("linear_apply: threads must be >= 1");
  const fields::Axis ax = datum.field.x;
  const fields::Axis ay = datum.field.y;
  if (ax.n < 4 || ay.n < 4) throw std::invalid_argument("linear_apply: grid too small");
  if (datum.field.v.size() != ax.n * ay.n)
    throw std::invalid_argument("linear_apply: field storage does not match its axes");

  LinearApplyResult out;
  const detail::SupportBox box = detail::support_box(datum.field, opt.support_rel_tol);
  if (box.peak == 0.0) {  // the zero datum evolves to zero
    out.u = fields::Field2D(ax, ay);
    out.a = fields::Field2D(ax, ay);
    return out;
  }
  // the support must stay inside the central half of the window so that the
  // padded circular convolution cannot wrap anything physical
  const double qx = 0.25 * (ax.max - ax.min), qy = 0.25 * (ay.max - ay.min);
  if (ax.coord(box.i0) < ax.min + qx - 1e-12 || ax.coord(box.i1) > ax.max - qx + 1e-12 ||
      ay.coord(box.j0) < ay.min + qy - 1e-12 || ay.coord(box.j1) > ay.max - qy + 1e-12)
    throw std::invalid_argument(
        "linear_apply: insufficient padding; the datum support must lie inside the central "
        "half of the window");
  const long dilo = -static_cast<long>(box.i1);
  const long dihi = static_cast<long>(ax.n) - 1 - static_cast<long>(box.i0);
  const long djmax = std::max(static_cast<long>(box.j1),
                              static_cast<long>(ay.n) - 1 - static_cast<long>(box.j0));
  const double hx = ax.step(), hy = ay.step();
  double l1 = 0.0;
  for (double v : datum.field.v) l1 += std::fabs(v);
  l1 *= hx * hy;

  detail::Convolver conv(ax, ay);
  std::vector<std::complex<double>> ghat, ahat;
  if (spec.family == kernels::Family::kp) {
    const double s1 = std::pow(t, -1.0 / (spec.alpha + 1.0));
    const double s2 = 0.25 * std::pow(t, -(spec.alpha + 2.0) / (spec.alpha + 1.0));
    const double dxlo = static_cast<double>(dilo) * hx;
    const double dxhi = static_cast<double>(dihi) * hx;
    const double dymax = static_cast<double>(djmax) * hy;
    const double lam_lo = s1 * dxlo;
    const double lam_hi = s1 * dxhi + s2 * dymax * dymax;
    KernelLine local;
    const KernelLine* line = opt.line;
    if (line == nullptr) {
      local = build_kernel_line(spec.alpha, spec.epsilon, lam_lo, lam_hi, opt.quad, opt.threads,
                                opt.table_tol);
      line = &local;
    } else {
      if (line->alpha != spec.alpha || line->epsilon != spec.epsilon)
        throw std::invalid_argument("linear_apply: kernel line built for different dispersion");
      if (!line->covers(lam_lo, lam_hi))
        throw std::invalid_argument("linear_apply: kernel line does not cover the lattice");
    }
    const double pg = std::pow(t, -(0.5 + 1.5 / (spec.alpha + 1.0)));
    const double pa =
        double(kernels::kFresnelC) * std::pow(t, -0.5 * (spec.alpha + 2.0) / (spec.alpha + 1.0));
    auto lam = [s1, s2](double dx, double dy) { return s1 * dx + s2 * dy * dy; };
    ghat = conv.kernel_hat(
        [&](double dx, double dy) { return pg * line->g_at(lam(dx, dy)); }, dilo, dihi, djmax,
        opt.threads);
    ahat = conv.kernel_hat(
        [&](double dx, double dy) { return pa * line->a_at(lam(dx, dy)); }, dilo, dihi, djmax,
        opt.threads);
    out.kernel_error =
        std::max(line->g.build_error(), line->a.build_error()) + line->node_error;
    out.converged = line->converged;
    double edge = 0.0;
    for (double dy : {0.0, dymax})
      for (double dx : {dxlo, dxhi}) {
        edge = std::max(edge, std::fabs(pg * line->g_at(lam(dx, dy))));
        edge = std::max(edge, std::fabs(pa * line->a_at(lam(dx, dy))));
      }
    out.boundary_contamination = edge * l1;
  } else {
    detail::AtomicMax err, flushed;
    std::atomic<bool> ok{true};
    detail::BbmLattice kg{&spec, kernels::KernelKind::G, t,   opt.quad, opt.bbm_lambda_cap,
                          opt.bbm_secondary_cap,         &err, &flushed, &ok};
    detail::BbmLattice ka = kg;
    ka.kind = kernels::KernelKind::A;
    ghat = conv.kernel_hat(kg, dilo, dihi, djmax, opt.threads);
    ahat = conv.kernel_hat(ka, dilo, dihi, djmax, opt.threads);
    out.kernel_error = err.value() + flushed.value();
    out.converged = ok.load();
    const double dxlo = static_cast<double>(dilo) * hx;
    const double dxhi = static_cast<double>(dihi) * hx;
    double edge = 0.0;
    for (double dx : {dxlo, dxhi}) {
      edge = std::max(edge, std::fabs(kg(dx, 0.0)));
      edge = std::max(edge, std::fabs(ka(dx, 0.0)));
    }
    out.boundary_contamination = edge * l1;
  }
  out.u = conv.apply(ghat, datum.field);
  out.a = conv.apply(ahat, datum.field);
  return out;
}

// ---------------------------------------------------------------------------
// Duhamel fixed point
// ---------------------------------------------------------------------------

struct PicardOptions {
  int max_iterations = 8;
  int s_nodes = 6;  // Gauss nodes for the singular s-integral per time node
  int threads = 1;
  oscquad::QuadratureConfig quad{};
  double table_tol = 3e-12;
  double support_rel_tol = 1e-12;
  // cache of kernel transforms across iterations (they repeat exactly)
  std::size_t kernel_cache_bytes = std::size_t(1) << 28;
  const KernelLine* line = nullptr;  // optional prebuilt profile tables (kp)
  double bbm_lambda_cap = 800.0;
  double bbm_secondary_cap = 800.0;
};

namespace detail {

// Lagrange interpolation in time on the uniform node ladder, degree at most
// cubic, stencil clamped to the ladder. nodes[k] lives at time k * ht.
inline fields::Field2D interp_time(const std::vector<fields::Field2D>& nodes, double ht,
                                   double s) {
  const int n = static_cast<int>(nodes.size()) - 1;
  const int deg = std::min(3, n);
  int k0 = static_cast<int>(std::floor(s / ht)) - (deg - 1) / 2;
  k0 = std::clamp(k0, 0, n - deg);
  double w[4] = {0.0, 0.0, 0.0, 0.0};
  for (int m = 0; m <= deg; ++m) {
    double p = 1.0;
    const double tm = (k0 + m) * ht;
    for (int l = 0; l <= deg; ++l) {
      if (l == m) continue;
      const double tl = (k0 + l) * ht;
      p *= (s - tl) / (tm - tl);
    }
    w[m] = p;
  }
  fields::Field2D out(nodes[0].x, nodes[0].y);
  for (int m = 0; m <= deg; ++m) {
    const fields::Field2D& f = nodes[static_cast<std::size_t>(k0 + m)];
    for (std::size_t q = 0; q < out.v.size(); ++q) out.v[q] += w[m] * f.v[q];
  }
  return out;
}

// The family-specific pieces of the fixed-point iteration: the elapsed-time
// kernel transform loader, the endpoint weight exponent of the s-integral,
// and the x-multiplier turning u^2/2 into the convolved nonlinearity.
struct PicardKernels {
  double gamma = 0.5;
  std::vector<std::complex<double>> w_mult;
  std::function<std::vector<std::complex<double>>(Convolver&, double)> a_hat;
};

inline SolutionTrajectory picard_solve(const kernels::DispersionSpec& spec,
                                       const InitialDatum& datum, double T, int n_times,
                                       double tol, const PicardOptions& opt,
                                       const PicardKernels& pk) {
  if (!std::isfinite(T) || !(T > 0.0))
    throw std::invalid_argument("picard: horizon T must be positive");
  if (n_times < 1 || n_times > 512)
    throw std::invalid_argument("picard: need 1 <= n_times <= 512");
  if (!(tol > 0.0)) throw std::invalid_argument("picard: tolerance must be positive");
  if (opt.max_iterations < 1 || opt.s_nodes < 1 || opt.s_nodes > 64 || opt.threads < 1)
    throw std::invalid_argument("picard: bad iteration options");
  const fields::Axis ax = datum.field.x;
  const fields::Axis ay = datum.field.y;
  const int n = n_times;
  const double ht = T / n;
  const JacobiRule rule = gauss_jacobi(opt.s_nodes, pk.gamma);

  LinearOptions lopt;
  lopt.threads = opt.threads;
  lopt.quad = opt.quad;
  lopt.table_tol = opt.table_tol;
  lopt.support_rel_tol = opt.support_rel_tol;
  lopt.line = opt.line;
  lopt.bbm_lambda_cap = opt.bbm_lambda_cap;
  lopt.bbm_secondary_cap = opt.bbm_secondary_cap;
  std::vector<LinearApplyResult> lin(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i)
    lin[static_cast<std::size_t>(i)] = linear_apply(spec, datum, i * ht, lopt);

  Convolver conv(ax, ay);
  Fft2D grid_fft(ax.n, ay.n);

  // kernel transforms repeat exactly across iterations: cache them up to the
  // byte budget, keyed by their (time node, quadrature node) pair
  std::map<std::pair<int, int>, std::vector<std::complex<double>>> cache;
  const std::size_t hat_bytes = conv.padded_size() * sizeof(std::complex<double>);
  const std::size_t cache_cap = opt.kernel_cache_bytes / std::max<std::size_t>(hat_bytes, 1);
  std::vector<std::complex<double>> scratch;
  auto hat_for = [&](int i, int j, double tau) -> const std::vector<std::complex<double>>& {
    const auto key = std::make_pair(i, j);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> h = pk.a_hat(conv, tau);
    if (cache.size() < cache_cap) return cache.emplace(key, std::move(h)).first->second;
    scratch = std::move(h);
    return scratch;
  };

  std::vector<fields::Field2D> U(static_cast<std::size_t>(n) + 1);
  std::vector<fields::Field2D> A(static_cast<std::size_t>(n) + 1);
  std::vector<fields::Field2D> Uprev;
  U[0] = datum.field;
  for (int i = 1; i <= n; ++i) U[static_cast<std::size_t>(i)] = fields::Field2D(ax, ay);
  std::vector<std::vector<double>> hist(static_cast<std::size_t>(n) + 1);

  bool converged = false;
  for (int iter = 1; iter <= opt.max_iterations && !converged; ++iter) {
    double worst = 0.0;
    for (int i = 1; i <= n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      fields::Field2D unew, anew;
      if (iter == 1) {
        // the first iterate is the linear evolution, reproduced verbatim
        unew = lin[si].u;
        anew = lin[si].a;
      } else {
        const double ti = i * ht;
        fields::Field2D C(ax, ay);
        for (int j = 0; j < opt.s_nodes; ++j) {
          const double v = rule.nodes[static_cast<std::size_t>(j)];
          const double tau = ti * v;     // elapsed kernel time
          const double s = ti * (1.0 - v);  // source time, strictly interior
          fields::Field2D us = interp_time(Uprev, ht, s);
          for (double& q : us.v) q = 0.5 * q * q;
          const fields::Field2D w = apply_x_multiplier(grid_fft, us, pk.w_mult);
          const fields::Field2D dc = conv.apply(hat_for(i, j, tau), w);
          const double cj =
              ti * rule.weights[static_cast<std::size_t>(j)] * std::pow(v, pk.gamma);
          for (std::size_t q = 0; q < C.v.size(); ++q) C.v[q] += cj * dc.v[q];
        }
        const fields::Field2D dxc =
            apply_x_multiplier(grid_fft, C, x_deriv_multiplier(ax.n, ax.step()));
        unew = lin[si].u;
        for (std::size_t q = 0; q < unew.v.size(); ++q) unew.v[q] -= dxc.v[q];
        anew = lin[si].a;
        for (std::size_t q = 0; q < anew.v.size(); ++q) anew.v[q] -= C.v[q];
      }
      double r = 0.0;
      for (std::size_t q = 0; q < unew.v.size(); ++q)
        r = std::max(r, std::fabs(unew.v[q] - (iter == 1 ? 0.0 : U[si].v[q])));
      hist[si].push_back(r);
      worst = std::max(worst, r);
      U[si] = std::move(unew);
      A[si] = std::move(anew);
    }
    for (int i = 1; i <= n; ++i) {
      const std::vector<double>& h = hist[static_cast<std::size_t>(i)];
      const std::size_t k = h.size();
      if (k >= 2 && h[k - 1] >= h[k - 2] && h[k - 2] > tol) {
        std::ostringstream msg;
        msg << "picard iteration is not contracting at t = " << i * ht
            << "; residual history:";
        for (double r : h) msg << ' ' << r;
        msg << "; reduce the amplitude or the horizon, or refine the time ladder";
        throw std::runtime_error(msg.str());
      }
    }
    converged = worst <= tol;
    if (!converged && iter == opt.max_iterations) {
      std::ostringstream msg;
      msg << "picard iteration did not reach tolerance " << tol << " in "
          << opt.max_iterations << " sweeps; worst residual " << worst;
      throw std::runtime_error(msg.str());
    }
    if (!converged) Uprev = U;  // snapshot for the next sweep's interpolation
  }

  SolutionTrajectory tr;
  tr.spec = spec;
  tr.method = EvolveMethod::duhamel_picard;
  tr.times.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) tr.times[static_cast<std::size_t>(i)] = i * ht;
  tr.fields = std::move(U);
  tr.antiderivatives = std::move(A);
  tr.picard_residuals = std::move(hist);
  return tr;
}

}  // namespace detail

// Nonlinear solve by Duhamel fixed point: u(t) = S(t) phi - int_0^t S(t - s)
// (u u_x)(s) ds. One x-derivative moves onto the kernel, turning S(t - s) of
// the derivative into a convolution with the antiderivative kernel A whose
// endpoint singularity (t - s)^{-gamma} the Gauss-Jacobi rule absorbs. The
// first iterate reproduces linear_apply verbatim.
inline SolutionTrajectory duhamel_solve(const kernels::DispersionSpec& spec,
                                        const InitialDatum& datum, double T, int n_times,
                                        double tol, const PicardOptions& opt = {}) {
  kernels::validate(spec);
  if (spec.family != kernels::Family::kp)
    throw std::invalid_argument(
        "duhamel_solve: kp family only; bbm_solve handles the bounded-multiplier family");
  if (spec.transverse_dim != 1) throw std::invalid_argument("duhamel_solve: planar only");
  const fields::Axis& ax = datum.field.x;
  const fields::Axis& ay = datum.field.y;
  if (ax.n < 4 || ay.n < 4) throw std::invalid_argument("duhamel_solve: grid too small");
  if (n_times < 1 || n_times > 512)
    throw std::invalid_argument("duhamel_solve: need 1 <= n_times <= 512");
  if (opt.s_nodes < 1 || opt.s_nodes > 64)
    throw std::invalid_argument("duhamel_solve: bad s_nodes");
  if (!std::isfinite(T) || !(T > 0.0))
    throw std::invalid_argument("duhamel_solve: horizon T must be positive");

  const double gamma = 0.5 * (spec.alpha + 2.0) / (spec.alpha + 1.0);
  const JacobiRule rule = gauss_jacobi(opt.s_nodes, gamma);
  const double ht = T / n_times;
  const double hx = ax.step(), hy = ay.step();
  const double dxmax = (ax.n - 1) * hx, dymax = (ay.n - 1) * hy;

  // one profile-table hull covering the linear times and every elapsed
  // kernel time of the quadrature, over the full difference lattice
  double lam_lo = 0.0, lam_hi = 0.0;
  auto fold = [&](double tau) {
    const double s1 = std::pow(tau, -1.0 / (spec.alpha + 1.0));
    const double s2 = 0.25 * std::pow(tau, -(spec.alpha + 2.0) / (spec.alpha + 1.0));
    lam_lo = std::min(lam_lo, -s1 * dxmax);
    lam_hi = std::max(lam_hi, s1 * dxmax + s2 * dymax * dymax);
  };
  for (int i = 1; i <= n_times; ++i) {
    fold(i * ht);
    for (int j = 0; j < opt.s_nodes; ++j) fold(i * ht * rule.nodes[static_cast<std::size_t>(j)]);
  }
  KernelLine local;
  const KernelLine* line = opt.line;
  if (line != nullptr) {
    if (line->alpha != spec.alpha || line->epsilon != spec.epsilon)
      throw std::invalid_argument("duhamel_solve: kernel line built for different dispersion");
  } else {
    local = build_kernel_line(spec.alpha, spec.epsilon, lam_lo, lam_hi, opt.quad, opt.threads,
                              opt.table_tol);
    line = &local;
  }
  PicardOptions opt2 = opt;
  opt2.line = line;

  detail::PicardKernels pk;
  pk.gamma = gamma;
  pk.w_mult = detail::x_deriv_multiplier(ax.n, hx);
  const long dimax = static_cast<long>(ax.n) - 1;
  const long djmax = static_cast<long>(ay.n) - 1;
  pk.a_hat = [&spec, line, dimax, djmax, dxmax, dymax,
              threads = opt.threads](detail::Convolver& cv, double tau) {
    const double s1 = std::pow(tau, -1.0 / (spec.alpha + 1.0));
    const double s2 = 0.25 * std::pow(tau, -(spec.alpha + 2.0) / (spec.alpha + 1.0));
    if (!line->covers(-s1 * dxmax, s1 * dxmax + s2 * dymax * dymax))
      throw std::invalid_argument(
          "duhamel_solve: kernel line does not cover an elapsed-time lattice; build it over "
          "the full hull");
    const double pa = double(kernels::kFresnelC) *
                      std::pow(tau, -0.5 * (spec.alpha + 2.0) / (spec.alpha + 1.0));
    return cv.kernel_hat(
        [&](double dx, double dy) { return pa * line->a_at(s1 * dx + s2 * dy * dy); }, -dimax,
        dimax, djmax, threads);
  };
  return detail::picard_solve(spec, datum, T, n_times, tol, opt2, pk);
}

// The bounded-multiplier counterpart. The sampled kernels carry the Sobolev
// weight (1 + xi^2)^{-k} with 2k = weight_order, so the Duhamel nonlinearity
// gains the matching factor: the x-multiplier is i xi (1 + xi^2)^k applied
// to u^2/2. The s-weight exponent is 1/2 independent of alpha.
inline SolutionTrajectory bbm_solve(const kernels::DispersionSpec& spec,
                                    const InitialDatum& datum, double T, int n_times, double tol,
                                    const PicardOptions& opt = {}) {
  kernels::validate(spec);
  if (spec.family != kernels::Family::kp_bbm)
    throw std::invalid_argument("bbm_solve: kp_bbm family only");
  if (spec.transverse_dim != 1) throw std::invalid_argument("bbm_solve: planar only");
  const fields::Axis& ax = datum.field.x;
  const fields::Axis& ay = datum.field.y;
  if (ax.n < 4 || ay.n < 4) throw std::invalid_argument("bbm_solve: grid too small");

  detail::PicardKernels pk;
  pk.gamma = 0.5;
  pk.w_mult = detail::x_deriv_multiplier(ax.n, ax.step(), 0.5 * spec.weight_order);
  const long dimax = static_cast<long>(ax.n) - 1;
  const long djmax = static_cast<long>(ay.n) - 1;
  pk.a_hat = [&spec, &opt, dimax, djmax](detail::Convolver& cv, double tau) {
    detail::AtomicMax err, flushed;
    std::atomic<bool> ok{true};
    detail::BbmLattice ka{&spec,   kernels::KernelKind::A, tau, opt.quad, opt.bbm_lambda_cap,
                          opt.bbm_secondary_cap,           &err, &flushed, &ok};
    return cv.kernel_hat(ka, -dimax, dimax, djmax, opt.threads);
  };
  return detail::picard_solve(spec, datum, T, n_times, tol, opt, pk);
}

// ---------------------------------------------------------------------------
// Spectral stepper on the torus
// ---------------------------------------------------------------------------

// Periodic window [x_min, x_max) x [y_min, y_max): the right edges are
// excluded, unlike the inclusive Axis grids of the convolution path.
struct TorusGrid {
  double x_min = -40.0, x_max = 40.0;
  double y_min = -40.0, y_max = 40.0;
  std::size_t nx = 256, ny = 256;

  double x_period() const { return x_max - x_min; }
  double y_period() const { return y_max - y_min; }
  double x_step() const { return x_period() / static_cast<double>(nx); }
  double y_step() const { return y_period() / static_cast<double>(ny); }
  double x_coord(std::size_t i) const { return x_min + static_cast<double>(i) * x_step(); }
  double y_coord(std::size_t j) const { return y_min + static_cast<double>(j) * y_step(); }
};

inline void validate(const TorusGrid& g) {
  if (!std::isfinite(g.x_min) || !std::isfinite(g.x_max) || !std::isfinite(g.y_min) ||
      !std::isfinite(g.y_max))
    throw std::invalid_argument("TorusGrid: bounds must be finite");
  if (!(g.x_max > g.x_min) || !(g.y_max > g.y_min))
    throw std::invalid_argument("TorusGrid: empty window");
  if (g.nx < 8 || g.ny < 8 || g.nx % 2 != 0 || g.ny % 2 != 0)
    throw std::invalid_argument("TorusGrid: need even nx, ny >= 8");
}

struct TorusState {
  TorusGrid grid;
  double time = 0.0;
  std::vector<double> u;  // row-major, x fastest
};

template <class F>
TorusState make_torus_state(const TorusGrid& g, F&& f, double time = 0.0) {
  validate(g);
  TorusState st{g, time, std::vector<double>(g.nx * g.ny, 0.0)};
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) st.u[j * g.nx + i] = f(g.x_coord(i), g.y_coord(j));
  return st;
}

struct SpectralOptions {
  bool nonlinear = true;
  // largest admissible fraction of the field energy on the xi = 0 plane,
  // where the dispersion multiplier is singular
  double zero_mode_tol = 1e-12;
};

// One exponential two-stage step (exact linear propagator, second-order
// nonlinear coupling) of the planar equation on the torus. The dispersion
// multiplier omega = eps xi |xi|^alpha - eta^2 / xi is singular on the
// xi = 0 plane: states carrying energy there are rejected, and the plane is
// projected out so round-off cannot reintroduce it.
inline TorusState spectral_step(const kernels::DispersionSpec& spec, const TorusState& state,
                                double dt, const SpectralOptions& opt = {}) {
  kernels::validate(spec);
  if (spec.family != kernels::Family::kp || spec.transverse_dim != 1)
    throw std::invalid_argument("spectral_step: planar kp family only");
  if (!std::isfinite(dt) || dt == 0.0)
    throw std::invalid_argument("spectral_step: dt must be finite and nonzero");
  validate(state.grid);
  const TorusGrid& g = state.grid;
  const std::size_t nx = g.nx, ny = g.ny, nq = nx * ny;
  if (state.u.size() != nq)
    throw std::invalid_argument("spectral_step: state storage does not match its grid");

  detail::Fft2D fft(nx, ny);
  std::complex<double>* b = fft.data();
  for (std::size_t q = 0; q < nq; ++q) b[q] = state.u[q];
  fft.forward();
  std::vector<std::complex<double>> uhat(b, b + nq);

  double e0 = 0.0, etot = 0.0;
  for (std::size_t q = 0; q < nq; ++q) etot += std::norm(uhat[q]);
  for (std::size_t j = 0; j < ny; ++j) e0 += std::norm(uhat[j * nx]);
  if (etot > 0.0 && e0 > opt.zero_mode_tol * etot)
    throw std::invalid_argument(
        "spectral_step: the xi = 0 plane carries field energy; remove the x-mean of every "
        "y line before stepping");
  for (std::size_t j = 0; j < ny; ++j) uhat[j * nx] = 0.0;

  // exact propagator and the two stage weights per mode
  std::vector<std::complex<double>> E(nq), p1(nq), p2(nq);
  const double hx = g.x_step(), hy = g.y_step();
  for (std::size_t j = 0; j < ny; ++j) {
    const double eta = detail::mode_freq(j, ny, hy);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t q = j * nx + i;
      if (i == 0) {
        E[q] = 1.0;
        p1[q] = 0.0;
        p2[q] = 0.0;
        continue;
      }
      const double xi = detail::mode_freq(i, nx, hx);
      const double omega =
          spec.epsilon * xi * std::pow(std::fabs(xi), spec.alpha) - eta * eta / xi;
      const std::complex<double> z{0.0, dt * omega};
      E[q] = std::exp(z);
      if (std::abs(z) < 1e-3) {
        p1[q] = 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
        p2[q] = 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0));
      } else {
        p1[q] = (E[q] - 1.0) / z;
        p2[q] = (E[q] - 1.0 - z) / (z * z);
      }
      p1[q] *= dt;
      p2[q] *= dt;
    }
  }

  // 2/3-rule mask shared by both nonlinear stages
  std::vector<char> keep(nq, 1);
  for (std::size_t j = 0; j < ny; ++j) {
    const long kj = static_cast<long>(j) <= static_cast<long>(ny / 2)
                        ? static_cast<long>(j)
                        : static_cast<long>(j) - static_cast<long>(ny);
    for (std::size_t i = 0; i < nx; ++i) {
      const long ki = static_cast<long>(i) <= static_cast<long>(nx / 2)
                          ? static_cast<long>(i)
                          : static_cast<long>(i) - static_cast<long>(nx);
      if (std::labs(ki) > static_cast<long>(nx / 3) || std::labs(kj) > static_cast<long>(ny / 3))
        keep[j * nx + i] = 0;
    }
  }
  auto nonlin = [&](const std::vector<std::complex<double>>& vhat) {
    std::vector<std::complex<double>> nhat(nq, std::complex<double>{0.0, 0.0});
    if (!opt.nonlinear) return nhat;
    for (std::size_t q = 0; q < nq; ++q) b[q] = keep[q] ? vhat[q] : 0.0;
    fft.backward();
    const double inv = 1.0 / static_cast<double>(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      const double ur = b[q].real() * inv;
      b[q] = ur * ur;
    }
    fft.forward();
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t q = j * nx + i;
        if (!keep[q] || i == 0 || (nx % 2 == 0 && i == nx / 2)) continue;
        const double xi = detail::mode_freq(i, nx, hx);
        nhat[q] = std::complex<double>{0.0, -0.5 * xi} * b[q];
      }
    return nhat;
  };

  const std::vector<std::complex<double>> n1 = nonlin(uhat);
  std::vector<std::complex<double>> mid(nq);
  for (std::size_t q = 0; q < nq; ++q) mid[q] = E[q] * uhat[q] + p1[q] * n1[q];
  if (opt.nonlinear) {
    const std::vector<std::complex<double>> n2 = nonlin(mid);
    for (std::size_t q = 0; q < nq; ++q) mid[q] += p2[q] * (n2[q] - n1[q]);
  }
  for (std::size_t j = 0; j < ny; ++j) mid[j * nx] = 0.0;

  std::copy(mid.begin(), mid.end(), b);
  fft.backward();
  TorusState out{g, state.time + dt, std::vector<double>(nq, 0.0)};
  const double inv = 1.0 / static_cast<double>(nq);
  for (std::size_t q = 0; q < nq; ++q) out.u[q] = b[q].real() * inv;
  return out;
}

// Repeated stepping with periodic recording. The recorded fields live on the
// inclusive Axis representation of the torus lattice (right edge one step
// short of the period).
inline SolutionTrajectory spectral_solve(const kernels::DispersionSpec& spec,
                                         const TorusState& init, double dt, int n_steps,
                                         int record_every, const SpectralOptions& opt = {}) {
  if (n_steps < 1 || record_every < 1)
    throw std::invalid_argument("spectral_solve: need n_steps, record_every >= 1");
  validate(init.grid);
  const TorusGrid& g = init.grid;
  const fields::Axis ax{g.x_min, g.x_max - g.x_step(), g.nx};
  const fields::Axis ay{g.y_min, g.y_max - g.y_step(), g.ny};
  SolutionTrajectory tr;
  tr.spec = spec;
  tr.method = EvolveMethod::spectral_torus;
  auto record = [&](const TorusState& st) {
    fields::Field2D f(ax, ay);
    f.v = st.u;
    tr.times.push_back(st.time);
    tr.fields.push_back(std::move(f));
  };
  TorusState cur = init;
  record(cur);
  for (int s = 1; s <= n_steps; ++s) {
    cur = spectral_step(spec, cur, dt, opt);
    if (s % record_every == 0 || s == n_steps) record(cur);
  }
  return tr;
}

}  // namespace kpmass::evolve
