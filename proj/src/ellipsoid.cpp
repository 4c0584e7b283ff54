#include "sps/ellipsoid.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

namespace sps {

double Ellipsoid::quadratic_form(const Vector& theta) const {
  const Vector delta = theta - center;
  return delta.dot(shape * delta);
}

bool Ellipsoid::contains(const Vector& theta) const {
  if (!bounded()) return true;
  return quadratic_form(theta) <= radius;
}

double Ellipsoid::radial_extent(const Vector& u) const {
  if (!bounded()) return std::numeric_limits<double>::infinity();
  return std::sqrt(radius / u.dot(shape * u));
}

Vector Ellipsoid::half_widths() const {
  const auto d = dimension();
  if (!bounded()) return Vector::Constant(d, std::numeric_limits<double>::infinity());
  // max of e_j^T delta subject to delta^T S delta <= r is sqrt(r (S^{-1})_jj)
  const Matrix inv = shape.llt().solve(Matrix::Identity(d, d));
  return (radius * inv.diagonal().array()).sqrt().matrix();
}

void to_json(nlohmann::json& j, const Ellipsoid& e) {
  std::vector<double> center(e.center.data(), e.center.data() + e.center.size());
  std::vector<double> shape;
  shape.reserve(static_cast<std::size_t>(e.shape.size()));
  for (Eigen::Index r = 0; r < e.shape.rows(); ++r) {
    for (Eigen::Index c = 0; c < e.shape.cols(); ++c) shape.push_back(e.shape(r, c));
  }
  j = nlohmann::json{{"center", center}, {"shape", shape}};
  if (e.bounded()) {
    j["radius"] = e.radius;
  } else {
    j["radius"] = "inf";
  }
}

void from_json(const nlohmann::json& j, Ellipsoid& e) {
  const auto center = j.at("center").get<std::vector<double>>();
  const auto shape = j.at("shape").get<std::vector<double>>();
  const auto d = static_cast<Eigen::Index>(center.size());
  if (static_cast<Eigen::Index>(shape.size()) != d * d) throw ParseError("ellipsoid: shape must have d*d entries");
  e.center = Eigen::Map<const Vector>(center.data(), d);
  e.shape.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) e.shape(r, c) = shape[static_cast<std::size_t>(r * d + c)];
  }
  const auto& rad = j.at("radius");
  if (rad.is_string() || rad.is_null()) {
    e.radius = std::numeric_limits<double>::infinity();
  } else {
    e.radius = rad.get<double>();
  }
}

void write_ellipse_polyline_csv(std::ostream& out, const Ellipsoid& e, int points) {
  if (e.dimension() != 2) throw BadConfig("ellipse polyline needs d = 2");
  if (!e.bounded()) throw InfiniteRegion("ellipse polyline: radius is infinite");
  const Matrix l = e.shape.llt().matrixL();
  const auto lt = l.transpose().triangularView<Eigen::Upper>();
  out << "angle,x,y\n";
  out.precision(12);
  for (int k = 0; k < points; ++k) {
    const double a = 2.0 * std::numbers::pi * k / points;
    Vector u(2);
    u << std::cos(a), std::sin(a);
    const Vector p = e.center + std::sqrt(e.radius) * lt.solve(u);
    out << a << ',' << p(0) << ',' << p(1) << '\n';
  }
}

}  // namespace sps
