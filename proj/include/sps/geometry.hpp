#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sps/ellipsoid.hpp"
#include "sps/sps.hpp"

namespace sps {

using MembershipOracle = std::function<bool(const Vector&)>;

struct Ray {
  Vector direction;  // unit norm
  double distance = 0.0;  // +infinity when the oracle still holds at r_max
};

/// Boundary of a star-shaped set, sampled along rays from its center.
struct BoundaryTrace {
  Vector center;
  std::vector<Ray> rays;

  [[nodiscard]] Vector point(std::size_t k) const { return center + rays[k].distance * rays[k].direction; }
  [[nodiscard]] bool any_unbounded() const;
};

/// `count` unit vectors at angles 2 pi k / count.
std::vector<Vector> planar_directions(int count);

/// Per direction, bisection on [0, r_max] for the last member point along the
/// ray. The reported distance is a member point within `tol` of the
/// transition. Throws CenterExcluded if the oracle rejects `center`.
BoundaryTrace trace_boundary(const MembershipOracle& indicator, const Vector& center,
                             std::span<const Vector> directions, double r_max, double tol);

/// Same, with one search radius per direction and tol = rel_tol * r_max.
BoundaryTrace trace_boundary(const MembershipOracle& indicator, const Vector& center,
                             std::span<const Vector> directions, std::span<const double> r_max, double rel_tol);

/// Traces an SPS region with search radii 4x the over-bound's radial extent
/// (or `fallback_r_max` where the over-bound is unbounded).
BoundaryTrace trace_sps_boundary(const SpsRegion& region, const Ellipsoid& over_bound, int rays,
                                 double fallback_r_max = 10.0, double rel_tol = 1e-6);

struct Box2 {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
};

/// Membership of the cell centers of an nx x ny grid over `bounds`.
struct RegionRaster {
  Box2 bounds;
  int nx = 0;
  int ny = 0;
  std::vector<unsigned char> membership;  // row-major, index iy * nx + ix

  [[nodiscard]] double cell_x(int ix) const { return bounds.x_min + (ix + 0.5) * (bounds.x_max - bounds.x_min) / nx; }
  [[nodiscard]] double cell_y(int iy) const { return bounds.y_min + (iy + 0.5) * (bounds.y_max - bounds.y_min) / ny; }
  [[nodiscard]] bool at(int ix, int iy) const { return membership[static_cast<std::size_t>(iy) * nx + ix] != 0; }
  [[nodiscard]] std::size_t count() const;
};

RegionRaster rasterize(const MembershipOracle& indicator, const Box2& bounds, int nx, int ny);

/// Exact-arithmetic-equivalent raster of a 2-norm SPS region. Along each grid
/// row ||S_i||^2 - ||S_0||^2 is a quadratic in x, so the cells where S_i
/// outranks S_0 form at most two intervals; a sweep counts them per cell.
/// Agrees with rasterize(region.contains, ...) except for cells whose centers
/// sit within rounding of the boundary.
RegionRaster rasterize_sps(const SpsRegion& region, const Box2& bounds, int nx, int ny);

/// Axis-aligned box around a bounded ellipse, scaled by `margin`.
Box2 bounding_box(const Ellipsoid& e, double margin = 1.05);

double raster_area(const RegionRaster& raster);

/// V_d r^{d/2} / sqrt(det shape). Throws InfiniteRegion for unbounded ellipsoids.
double ellipsoid_volume(const Ellipsoid& e);

/// Volume of the d-dimensional unit ball.
double unit_ball_volume(int d);

// Output formats.
void write_boundary_csv(std::ostream& out, const BoundaryTrace& trace);
/// ASCII PGM (P2), 1 = member, top row is the largest y.
void write_raster_pgm(std::ostream& out, const RegionRaster& raster, const std::string& comment = {});
/// `x,y` cell centers of member cells.
void write_raster_members_csv(std::ostream& out, const RegionRaster& raster);

}  // namespace sps
