// Uniform sample axes and row-major planar fields shared by the kernel
// sampler, the propagators, and the diagnostics.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kpmass::fields {

// Inclusive uniform grid of n samples: coord(0) = min, coord(n-1) = max.
struct Axis {
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;

  double step() const { return n > 1 ? (max - min) / double(n - 1) : 0.0; }
  double coord(std::size_t i) const { return n > 1 ? min + double(i) * step() : min; }
};

inline void validate(const Axis& a, const char* who) {
  if (a.n < 1) throw std::invalid_argument(std::string(who) + ": axis needs n >= 1");
  if (!std::isfinite(a.min) || !std::isfinite(a.max))
    throw std::invalid_argument(std::string(who) + ": axis bounds must be finite");
  if (a.n > 1 && !(a.max > a.min))
    throw std::invalid_argument(std::string(who) + ": axis needs max > min");
}

// True when every node has an exact floating-point mirror partner, so even
// integrands may be evaluated on one half and reflected bitwise.
inline bool mirror_exact(const Axis& a) {
  for (std::size_t i = 0; i < a.n; ++i)
    if (a.coord(i) != -a.coord(a.n - 1 - i)) return false;
  return true;
}

// Scalar samples on an x-by-y lattice, x fastest: v[iy * x.n + ix].
struct Field2D {
  Axis x, y;
  std::vector<double> v;

  Field2D() = default;
  Field2D(const Axis& ax, const Axis& ay) : x(ax), y(ay), v(ax.n * ay.n, 0.0) {
    validate(ax, "Field2D");
    validate(ay, "Field2D");
  }

  double& at(std::size_t ix, std::size_t iy) { return v[iy * x.n + ix]; }
  double at(std::size_t ix, std::size_t iy) const { return v[iy * x.n + ix]; }
};

}  // namespace kpmass::fields
