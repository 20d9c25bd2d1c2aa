/**
 * @file geometry.hpp
 * @brief Voxelized inclusion geometries on the periodic unit cell.
 *
 * A voxel belongs to the inclusion iff its center lies inside the shape.
 * Distances use the minimum-image convention, so shapes wrap across the
 * cell boundary.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fftmor/field.hpp"

namespace fftmor {

using Point = std::array<double, 3>;

/// Disk in 2D, ball (sphere) in 3D.
struct Circle {
  Point center{0.5, 0.5, 0.5};
  double radius = 0.25;
};

struct Annulus {
  Point center{0.5, 0.5, 0.5};
  double inner = 0.15;
  double outer = 0.3;
};

/// Ellipse (2D, rotated by @c angle radians) or axis-aligned ellipsoid (3D).
struct Ellipse {
  Point center{0.5, 0.5, 0.5};
  Point semi_axes{0.35, 0.15, 0.15};
  double angle = 0.0;
};

/// Axis-aligned square (2D) or cube (3D).
struct Square {
  Point center{0.5, 0.5, 0.5};
  double side = 0.4;
};

/// Seeded random non-overlapping circles/spheres.
struct MultiCircle {
  int count = 6;
  double radius = 0.1;
  /// Radii drawn uniformly from radius·[1 − spread, 1 + spread].
  double spread = 0.0;
  /// Minimum clearance between neighbouring inclusions.
  double min_gap = 0.02;
  std::uint64_t seed = 42;
  int max_retries = 100000;
};

using GeometrySpec = std::variant<Circle, Annulus, Ellipse, Square, MultiCircle>;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline double min_image(double d) { return d - std::round(d); }

template <int Dim>
double periodic_dist2(const Point& a, const Point& b) {
  double s = 0.0;
  for (int j = 0; j < Dim; ++j) {
    const double d = min_image(a[j] - b[j]);
    s += d * d;
  }
  return s;
}

template <int Dim, typename Inside>
PhaseMap<Dim> voxelize(const Grid<Dim>& grid, Inside&& inside) {
  PhaseMap<Dim> pm(grid);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto idx = grid.unflat(f);
    Point x{0.0, 0.0, 0.0};
    for (int j = 0; j < Dim; ++j) x[j] = grid.center(j, idx[j]);
    pm.phase[f] = inside(x) ? 1 : 0;
  }
  return pm;
}

struct Placed {
  Point c;
  double r;
};

template <int Dim>
std::vector<Placed> place_circles(const MultiCircle& s) {
  if (s.count < 0) throw GeometryError("multi_circle.count must be >= 0");
  if (!(s.radius >= 0.0) || s.radius * (1.0 + s.spread) > 0.5)
    throw GeometryError("multi_circle.radius does not fit in the unit cell");
  if (s.spread < 0.0 || s.spread >= 1.0) throw GeometryError("multi_circle.spread must lie in [0, 1)");
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Placed> placed;
  int attempts = 0;
  while (static_cast<int>(placed.size()) < s.count) {
    if (++attempts > s.max_retries)
      throw GeometryError("multi_circle packing failed after " + std::to_string(s.max_retries) +
                          " attempts (placed " + std::to_string(placed.size()) + ")");
    Placed p{{0.0, 0.0, 0.0}, s.radius * (1.0 + s.spread * (2.0 * unit(rng) - 1.0))};
    for (int j = 0; j < Dim; ++j) p.c[j] = unit(rng);
    bool ok = true;
    for (const auto& q : placed) {
      const double min_d = p.r + q.r + s.min_gap;
      if (periodic_dist2<Dim>(p.c, q.c) < min_d * min_d) {
        ok = false;
        break;
      }
    }
    if (ok) placed.push_back(p);
  }
  return placed;
}

}  // namespace detail

template <int Dim>
PhaseMap<Dim> generate_geometry(const GeometrySpec& spec, const Grid<Dim>& grid) {
  using detail::min_image;
  return std::visit(
      [&](const auto& s) -> PhaseMap<Dim> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Circle>) {
          if (!(s.radius >= 0.0) || s.radius > 0.5) throw GeometryError("circle radius must lie in [0, 0.5]");
          const double r2 = s.radius * s.radius;
          return detail::voxelize(grid, [&](const Point& x) {
            return s.radius > 0.0 && detail::periodic_dist2<Dim>(x, s.center) <= r2;
          });
        } else if constexpr (std::is_same_v<S, Annulus>) {
          if (!(s.inner >= 0.0 && s.inner < s.outer && s.outer <= 0.5))
            throw GeometryError("annulus needs 0 <= inner < outer <= 0.5");
          return detail::voxelize(grid, [&](const Point& x) {
            const double d2 = detail::periodic_dist2<Dim>(x, s.center);
            return d2 <= s.outer * s.outer && d2 >= s.inner * s.inner;
          });
        } else if constexpr (std::is_same_v<S, Ellipse>) {
          for (int j = 0; j < Dim; ++j)
            if (!(s.semi_axes[j] > 0.0 && s.semi_axes[j] <= 0.5))
              throw GeometryError("ellipse semi-axes must lie in (0, 0.5]");
          const double ca = std::cos(s.angle), sa = std::sin(s.angle);
          return detail::voxelize(grid, [&](const Point& x) {
            std::array<double, 3> d{};
            for (int j = 0; j < Dim; ++j) d[j] = min_image(x[j] - s.center[j]);
            if constexpr (Dim == 2) {
              const double u = ca * d[0] + sa * d[1];
              const double v = -sa * d[0] + ca * d[1];
              d[0] = u;
              d[1] = v;
            }
            double q = 0.0;
            for (int j = 0; j < Dim; ++j) q += (d[j] / s.semi_axes[j]) * (d[j] / s.semi_axes[j]);
            return q <= 1.0;
          });
        } else if constexpr (std::is_same_v<S, Square>) {
          if (!(s.side >= 0.0 && s.side <= 1.0)) throw GeometryError("square side must lie in [0, 1]");
          return detail::voxelize(grid, [&](const Point& x) {
            for (int j = 0; j < Dim; ++j)
              if (std::abs(min_image(x[j] - s.center[j])) > 0.5 * s.side) return false;
            return s.side > 0.0;
          });
        } else {
          const auto placed = detail::place_circles<Dim>(s);
          return detail::voxelize(grid, [&](const Point& x) {
            for (const auto& p : placed)
              if (detail::periodic_dist2<Dim>(x, p.c) <= p.r * p.r) return true;
            return false;
          });
        }
      },
      spec);
}

}  // namespace fftmor
