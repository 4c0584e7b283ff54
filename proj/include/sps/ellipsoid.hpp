#pragma once

#include <iosfwd>
#include <limits>

#include <nlohmann/json_fwd.hpp>

#include "sps/types.hpp"

namespace sps {

/// {theta : (theta - center)^T shape (theta - center) <= radius}. An infinite
/// radius denotes the whole space.
struct Ellipsoid {
  Vector center;
  Matrix shape;
  double radius = 0.0;

  [[nodiscard]] Eigen::Index dimension() const { return center.size(); }
  [[nodiscard]] bool bounded() const { return radius < std::numeric_limits<double>::infinity(); }
  [[nodiscard]] double quadratic_form(const Vector& theta) const;
  [[nodiscard]] bool contains(const Vector& theta) const;

  /// Distance from the center to the boundary along the unit vector `u`.
  [[nodiscard]] double radial_extent(const Vector& u) const;
  /// Half-widths of the axis-aligned bounding box.
  [[nodiscard]] Vector half_widths() const;
};

// JSON: {"center": [...], "shape": [row-major], "radius": r | "inf"}.
void to_json(nlohmann::json& j, const Ellipsoid& e);
void from_json(const nlohmann::json& j, Ellipsoid& e);

/// 2-D boundary as `angle,x,y` rows, `points` samples of the parametric
/// sweep center + sqrt(radius) L^{-T} (cos a, sin a) with shape = L L^T.
void write_ellipse_polyline_csv(std::ostream& out, const Ellipsoid& e, int points = 360);

}  // namespace sps
