#include "sps/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace sps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

bool BoundaryTrace::any_unbounded() const {
  return std::any_of(rays.begin(), rays.end(), [](const Ray& r) { return std::isinf(r.distance); });
}

std::vector<Vector> planar_directions(int count) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double a = 2.0 * std::numbers::pi * k / count;
    Vector u(2);
    u << std::cos(a), std::sin(a);
    out.push_back(std::move(u));
  }
  return out;
}

namespace {

double bisect_ray(const MembershipOracle& indicator, const Vector& center, const Vector& u, double r_max,
                  double tol) {
  if (indicator(center + r_max * u)) return kInf;
  double lo = 0.0;
  double hi = r_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (indicator(center + mid * u)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

BoundaryTrace trace_boundary(const MembershipOracle& indicator, const Vector& center,
                             std::span<const Vector> directions, double r_max, double tol) {
  std::vector<double> radii(directions.size(), r_max);
  if (!(r_max > 0.0)) throw BadConfig("trace_boundary: r_max must be positive");
  if (!(tol > 0.0)) throw BadConfig("trace_boundary: tol must be positive");
  return trace_boundary(indicator, center, directions, radii, tol / r_max);
}

BoundaryTrace trace_boundary(const MembershipOracle& indicator, const Vector& center,
                             std::span<const Vector> directions, std::span<const double> r_max, double rel_tol) {
  if (r_max.size() != directions.size()) throw BadConfig("trace_boundary: one r_max per direction");
  if (!indicator(center)) throw CenterExcluded("trace_boundary: the center is not a member");
  BoundaryTrace trace;
  trace.center = center;
  trace.rays.reserve(directions.size());
  for (std::size_t k = 0; k < directions.size(); ++k) {
    if (!(r_max[k] > 0.0)) throw BadConfig("trace_boundary: r_max must be positive");
    const Vector u = directions[k].normalized();
    trace.rays.push_back(Ray{u, bisect_ray(indicator, center, u, r_max[k], rel_tol * r_max[k])});
  }
  return trace;
}

BoundaryTrace trace_sps_boundary(const SpsRegion& region, const Ellipsoid& over_bound, int rays,
                                 double fallback_r_max, double rel_tol) {
  if (region.dimension() != 2) throw BadConfig("boundary tracing is planar (d = 2)");
  const auto dirs = planar_directions(rays);
  std::vector<double> radii;
  radii.reserve(dirs.size());
  for (const auto& u : dirs) {
    const double extent = over_bound.radial_extent(u);
    radii.push_back(std::isfinite(extent) && extent > 0.0 ? 4.0 * extent : fallback_r_max);
  }
  const MembershipOracle oracle = [&region](const Vector& theta) { return region.contains(theta); };
  return trace_boundary(oracle, region.center(), dirs, radii, rel_tol);
}

std::size_t RegionRaster::count() const {
  return static_cast<std::size_t>(std::count(membership.begin(), membership.end(), 1));
}

namespace {

void check_grid(const Box2& b, int nx, int ny) {
  if (nx < 2 || ny < 2) throw BadConfig("raster resolution must be at least 2 per axis");
  if (!(b.x_max > b.x_min && b.y_max > b.y_min)) throw BadConfig("raster bounds are empty");
}

}  // namespace

RegionRaster rasterize(const MembershipOracle& indicator, const Box2& bounds, int nx, int ny) {
  check_grid(bounds, nx, ny);
  RegionRaster r{bounds, nx, ny, std::vector<unsigned char>(static_cast<std::size_t>(nx) * ny, 0)};
  Vector theta(2);
  for (int iy = 0; iy < ny; ++iy) {
    theta(1) = r.cell_y(iy);
    for (int ix = 0; ix < nx; ++ix) {
      theta(0) = r.cell_x(ix);
      r.membership[static_cast<std::size_t>(iy) * nx + ix] = indicator(theta) ? 1 : 0;
    }
  }
  return r;
}

namespace {

/// Marks +1 on the cells whose centers lie strictly inside (l, r).
void add_interval(std::vector<int>& diff, double l, double r, double x0, double dx, int nx) {
  if (!(r > l)) return;
  // first j with x0 + (j + 0.5) dx > l, last j with x0 + (j + 0.5) dx < r
  const double jl = std::clamp((l - x0) / dx - 0.5, -2.0, nx + 2.0);
  const double jr = std::clamp((r - x0) / dx - 0.5, -2.0, nx + 2.0);
  int first = static_cast<int>(std::floor(jl)) + 1;
  int last = static_cast<int>(std::ceil(jr)) - 1;
  first = std::max(first, 0);
  last = std::min(last, nx - 1);
  if (first > last) return;
  diff[static_cast<std::size_t>(first)] += 1;
  diff[static_cast<std::size_t>(last) + 1] -= 1;
}

}  // namespace

RegionRaster rasterize_sps(const SpsRegion& region, const Box2& bounds, int nx, int ny) {
  if (region.dimension() != 2) throw BadConfig("rasterize_sps needs d = 2");
  if (region.norm() != Norm::L2) throw NormUnsupported("rasterize_sps relies on the 2-norm quadratic form");
  check_grid(bounds, nx, ny);

  RegionRaster out{bounds, nx, ny, std::vector<unsigned char>(static_cast<std::size_t>(nx) * ny, 0)};
  const int m = region.m();
  const auto& g = region.offsets();
  const auto& big_g = region.slopes();
  const auto& pi = region.tie_break();
  const auto& constant = region.constant_rows();
  const double x0 = bounds.x_min;
  const double dx = (bounds.x_max - bounds.x_min) / nx;

  // Rows whose signs never change tie with S_0 everywhere; pi decides them once.
  int always = 0;
  for (int i = 1; i < m; ++i) {
    if (constant[static_cast<std::size_t>(i)] && pi[static_cast<std::size_t>(i)] > pi[0]) ++always;
  }

  std::vector<int> diff(static_cast<std::size_t>(nx) + 1);
  for (int iy = 0; iy < ny; ++iy) {
    const double y = out.cell_y(iy);
    std::fill(diff.begin(), diff.end(), 0);

    // S_i(x, y) = u_i - v_i x
    const auto uv = [&](int i, Eigen::Vector2d& u, Eigen::Vector2d& v) {
      const auto r0 = static_cast<Eigen::Index>(2 * i);
      u << g(r0) - big_g(r0, 1) * y, g(r0 + 1) - big_g(r0 + 1, 1) * y;
      v << big_g(r0, 0), big_g(r0 + 1, 0);
    };
    Eigen::Vector2d u0;
    Eigen::Vector2d v0;
    uv(0, u0, v0);
    const double a0 = v0.squaredNorm();
    const double b0 = u0.dot(v0);
    const double c0 = u0.squaredNorm();

    for (int i = 1; i < m; ++i) {
      if (constant[static_cast<std::size_t>(i)]) continue;
      Eigen::Vector2d ui;
      Eigen::Vector2d vi;
      uv(i, ui, vi);
      // D(x) = ||S_i||^2 - ||S_0||^2 = qa x^2 + qb x + qc
      const double qa = vi.squaredNorm() - a0;
      const double qb = -2.0 * (ui.dot(vi) - b0);
      const double qc = ui.squaredNorm() - c0;
      const double scale_a = vi.squaredNorm() + a0;

      if (std::fabs(qa) <= 1e-14 * scale_a) {
        // linear (or constant) in x
        if (qb > 0.0) {
          add_interval(diff, -qc / qb, kInf, x0, dx, nx);
        } else if (qb < 0.0) {
          add_interval(diff, -kInf, -qc / qb, x0, dx, nx);
        } else if (qc > 0.0) {
          add_interval(diff, -kInf, kInf, x0, dx, nx);
        }
        continue;
      }
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc <= 0.0) {
        if (qa > 0.0) add_interval(diff, -kInf, kInf, x0, dx, nx);
        continue;
      }
      const double sq = std::sqrt(disc);
      const double qq = -0.5 * (qb + std::copysign(sq, qb));
      double r1 = qq / qa;
      double r2 = qq != 0.0 ? qc / qq : r1;
      if (r1 > r2) std::swap(r1, r2);
      if (qa > 0.0) {
        add_interval(diff, -kInf, r1, x0, dx, nx);
        add_interval(diff, r2, kInf, x0, dx, nx);
      } else {
        add_interval(diff, r1, r2, x0, dx, nx);
      }
    }

    int running = always;
    auto* row = &out.membership[static_cast<std::size_t>(iy) * nx];
    for (int ix = 0; ix < nx; ++ix) {
      running += diff[static_cast<std::size_t>(ix)];
      row[ix] = running >= region.q() ? 1 : 0;
    }
  }
  return out;
}

Box2 bounding_box(const Ellipsoid& e, double margin) {
  if (e.dimension() != 2) throw BadConfig("bounding_box: need d = 2");
  if (!e.bounded()) throw InfiniteRegion("bounding_box: unbounded ellipse");
  const Vector h = margin * e.half_widths();
  return Box2{e.center(0) - h(0), e.center(0) + h(0), e.center(1) - h(1), e.center(1) + h(1)};
}

double raster_area(const RegionRaster& raster) {
  const double cell = (raster.bounds.x_max - raster.bounds.x_min) / raster.nx *
                      (raster.bounds.y_max - raster.bounds.y_min) / raster.ny;
  return cell * static_cast<double>(raster.count());
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double ellipsoid_volume(const Ellipsoid& e) {
  if (!e.bounded()) throw InfiniteRegion("ellipsoid volume: radius is infinite");
  const int d = static_cast<int>(e.dimension());
  const Eigen::LLT<Matrix> llt(e.shape);
  if (llt.info() != Eigen::Success) throw NumericalFailure("ellipsoid volume: shape is not positive definite");
  // sqrt(det S) = prod diag(L)
  const double sqrt_det = llt.matrixL().toDenseMatrix().diagonal().prod();
  return unit_ball_volume(d) * std::pow(e.radius, 0.5 * d) / sqrt_det;
}

void write_boundary_csv(std::ostream& out, const BoundaryTrace& trace) {
  out << "angle,distance,x,y\n";
  out.precision(12);
  for (std::size_t k = 0; k < trace.rays.size(); ++k) {
    const auto& ray = trace.rays[k];
    const double angle = std::atan2(ray.direction(1), ray.direction(0));
    out << angle << ',' << ray.distance << ',';
    if (std::isfinite(ray.distance)) {
      const Vector p = trace.point(k);
      out << p(0) << ',' << p(1) << '\n';
    } else {
      out << "inf,inf\n";
    }
  }
}

void write_raster_pgm(std::ostream& out, const RegionRaster& raster, const std::string& comment) {
  out << "P2\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out.precision(12);
  out << "# bounds " << raster.bounds.x_min << ' ' << raster.bounds.x_max << ' ' << raster.bounds.y_min << ' '
      << raster.bounds.y_max << '\n';
  out << raster.nx << ' ' << raster.ny << "\n1\n";
  for (int iy = raster.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < raster.nx; ++ix) {
      if (ix > 0) out << ' ';
      out << (raster.at(ix, iy) ? 1 : 0);
    }
    out << '\n';
  }
}

void write_raster_members_csv(std::ostream& out, const RegionRaster& raster) {
  out << "x,y\n";
  out.precision(12);
  for (int iy = 0; iy < raster.ny; ++iy) {
    for (int ix = 0; ix < raster.nx; ++ix) {
      if (raster.at(ix, iy)) out << raster.cell_x(ix) << ',' << raster.cell_y(iy) << '\n';
    }
  }
}

}  // namespace sps
