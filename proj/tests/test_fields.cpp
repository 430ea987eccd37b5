// Grid primitives: axis coordinate arithmetic, exact mirror symmetry, and
// planar field storage layout.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kpmass/fields.hpp"

namespace fd = kpmass::fields;

TEST_CASE("axis coordinates span the window uniformly") {
  const fd::Axis ax{-3.0, 5.0, 17};
  fd::validate(ax, "test axis");
  REQUIRE(ax.step() == Catch::Approx((5.0 - -3.0) / 16.0).epsilon(1e-15));
  REQUIRE(ax.coord(0) == -3.0);
  REQUIRE(ax.coord(16) == Catch::Approx(5.0).margin(1e-14));
  for (std::size_t i = 1; i < ax.n; ++i)
    REQUIRE(ax.coord(i) - ax.coord(i - 1) == Catch::Approx(ax.step()).epsilon(1e-14));
}

TEST_CASE("degenerate and malformed axes are rejected") {
  REQUIRE_THROWS_AS(fd::validate(fd::Axis{0.0, 1.0, 0}, "t"), std::invalid_argument);
  REQUIRE_THROWS_AS(fd::validate(fd::Axis{2.0, 1.0, 8}, "t"), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(fd::validate(fd::Axis{0.0, inf, 8}, "t"), std::invalid_argument);
  // a single-sample axis is legal and sits at its left edge
  const fd::Axis one{4.0, 4.0, 1};
  fd::validate(one, "t");
  REQUIRE(one.coord(0) == 4.0);
  REQUIRE(one.step() == 0.0);
}

TEST_CASE("mirror_exact certifies sign-symmetric sampling") {
  REQUIRE(fd::mirror_exact(fd::Axis{-4.0, 4.0, 33}));
  // even count with a dyadic step: symmetric without a center sample
  REQUIRE(fd::mirror_exact(fd::Axis{-3.75, 3.75, 16}));
  REQUIRE_FALSE(fd::mirror_exact(fd::Axis{-4.0, 4.5, 33}));
  REQUIRE_FALSE(fd::mirror_exact(fd::Axis{0.0, 4.0, 9}));
}

TEST_CASE("field storage is x-fastest and zero-initialized") {
  const fd::Axis ax{-1.0, 1.0, 5};
  const fd::Axis ay{0.0, 2.0, 3};
  fd::Field2D f(ax, ay);
  REQUIRE(f.v.size() == 15);
  for (double v : f.v) REQUIRE(v == 0.0);
  f.at(2, 1) = 7.0;
  REQUIRE(f.v[1 * 5 + 2] == 7.0);
  const fd::Field2D& cf = f;
  REQUIRE(cf.at(2, 1) == 7.0);
}
