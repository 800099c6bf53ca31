#include "vpfix/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vpfix/error.hpp"

namespace vpfix {
namespace {

constexpr double kDegenerateNorm = 1e-9;

double norm3(double a, double b, double c) { return std::sqrt(a * a + b * b + c * c); }

bool all_finite(double a, double b, double c) {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}

int orientation_sign(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

double norm(Point2 v) { return std::hypot(v.x, v.y); }
double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

HomogeneousPoint::HomogeneousPoint(double x, double y, double w) : x_(x), y_(y), w_(w) {
  if (!all_finite(x, y, w)) {
    throw Error(ErrorCode::kInvalidArgument, "homogeneous point has non-finite components");
  }
  if (x == 0.0 && y == 0.0 && w == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "homogeneous point (0, 0, 0) is undefined");
  }
}

HomogeneousPoint HomogeneousPoint::normalized() const {
  // Scale first so the norm cannot overflow for huge components.
  const double m = std::max({std::abs(x_), std::abs(y_), std::abs(w_)});
  double x = x_ / m;
  double y = y_ / m;
  double w = w_ / m;
  const double n = norm3(x, y, w);
  x /= n;
  y /= n;
  w /= n;
  const double first = x != 0.0 ? x : (y != 0.0 ? y : w);
  if (first < 0.0) {
    x = -x;
    y = -y;
    w = -w;
  }
  return {x + 0.0, y + 0.0, w + 0.0};
}

bool HomogeneousPoint::is_at_infinity(double tol) const {
  return std::abs(normalized().w()) < tol;
}

std::optional<Point2> HomogeneousPoint::euclidean() const {
  if (w_ == 0.0) return std::nullopt;
  return Point2{x_ / w_, y_ / w_};
}

LineSegment::LineSegment(Point2 p0, Point2 p1) : p0_(p0), p1_(p1) {
  if (!std::isfinite(p0.x) || !std::isfinite(p0.y) || !std::isfinite(p1.x) ||
      !std::isfinite(p1.y)) {
    throw Error(ErrorCode::kInvalidArgument, "segment endpoints must be finite");
  }
  if (norm(p1 - p0) < kMinLength) {
    throw Error(ErrorCode::kInvalidArgument, "segment endpoints coincide");
  }
}

UnitVector2 UnitVector2::from(double dx, double dy) {
  const double n = std::hypot(dx, dy);
  if (!(n >= kDegenerateNorm)) {
    throw Error(ErrorCode::kDegenerateDirection, "direction vector has (near) zero length");
  }
  return UnitVector2(dx / n, dy / n);
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(ErrorCode::kInvalidArgument, "camera intrinsics need fx > 0 and fy > 0");
  }
}

CameraIntrinsics CameraIntrinsics::default_for(int width, int height) {
  const double f = static_cast<double>(std::max(width, height));
  return {f, f, width / 2.0, height / 2.0};
}

UnitVector2 vp_direction_at(const HomogeneousPoint& vp, Point2 pixel) {
  // (x - u w, y - v w) keeps the sign of w, so finite VPs are represented with w > 0.
  double sx = vp.x() - pixel.x * vp.w();
  double sy = vp.y() - pixel.y * vp.w();
  if (vp.w() < 0.0) {
    sx = -sx;
    sy = -sy;
  }
  // Rescale so the degeneracy threshold is in pixels for finite VPs and
  // scale-free for points at infinity.
  const double scale = vp.w() != 0.0 ? std::abs(vp.w()) : std::max(std::abs(sx), std::abs(sy));
  sx /= scale;
  sy /= scale;
  return UnitVector2::from(sx, sy);
}

double undirected_angle(const UnitVector2& a, const UnitVector2& b) {
  const double c = std::clamp(std::abs(a.dx() * b.dx() + a.dy() * b.dy()), -1.0, 1.0);
  return std::acos(c);
}

double segment_vp_deviation(const LineSegment& seg, const HomogeneousPoint& vp) {
  const Point2 d = seg.p1() - seg.p0();
  return undirected_angle(UnitVector2::from(d.x, d.y), vp_direction_at(vp, seg.midpoint()));
}

std::array<double, 3> line_coefficients(const LineSegment& seg) {
  const Point2 p = seg.p0();
  const Point2 q = seg.p1();
  const double a = p.y - q.y;
  const double b = q.x - p.x;
  const double n = std::hypot(a, b);
  return {a / n, b / n, (p.x * q.y - q.x * p.y) / n};
}

HomogeneousPoint intersect_lines(const LineSegment& a, const LineSegment& b) {
  const auto l = line_coefficients(a);
  const auto m = line_coefficients(b);
  const double x = l[1] * m[2] - l[2] * m[1];
  const double y = l[2] * m[0] - l[0] * m[2];
  const double w = l[0] * m[1] - l[1] * m[0];
  // Unit-norm normals: |w| = |sin| of the angle between lines. For parallel lines
  // (x, y) is proportional to the offset between them.
  const double n = norm3(x, y, w);
  const double scale = std::max({1.0, std::abs(l[2]), std::abs(m[2])});
  if (n < 1e-9 * scale) {
    throw Error(ErrorCode::kIdenticalLines, "lines coincide; intersection undefined");
  }
  if (std::abs(w) < 1e-15 * n) {
    return HomogeneousPoint(x, y, 0.0).normalized();
  }
  return HomogeneousPoint(x, y, w).normalized();
}

UnitVector3 backproject_direction(const CameraIntrinsics& k, const HomogeneousPoint& vp) {
  const HomogeneousPoint n = vp.normalized();
  double x = (n.x() - k.cx * n.w()) / k.fx;
  double y = (n.y() - k.cy * n.w()) / k.fy;
  double z = n.w();
  const double len = norm3(x, y, z);
  x /= len;
  y /= len;
  z /= len;
  const bool flip = z < 0.0 || (z == 0.0 && (y < 0.0 || (y == 0.0 && x < 0.0)));
  if (flip) {
    x = -x;
    y = -y;
    z = -z;
  }
  return {x + 0.0, y + 0.0, z + 0.0};
}

double camera_angle_error(const CameraIntrinsics& k, const HomogeneousPoint& a,
                          const HomogeneousPoint& b) {
  const UnitVector3 da = backproject_direction(k, a);
  const UnitVector3 db = backproject_direction(k, b);
  const double c = std::clamp(std::abs(da.x * db.x + da.y * db.y + da.z * db.z), 0.0, 1.0);
  if (c < 0.9) return std::acos(c);
  // acos loses precision near 1; the cross-product norm keeps small angles exact.
  const double cx = da.y * db.z - da.z * db.y;
  const double cy = da.z * db.x - da.x * db.z;
  const double cz = da.x * db.y - da.y * db.x;
  return std::atan2(norm3(cx, cy, cz), c);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

bool segments_intersect(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
  const int o1 = orientation_sign(a0, a1, b0);
  const int o2 = orientation_sign(a0, a1, b1);
  const int o3 = orientation_sign(b0, b1, a0);
  const int o4 = orientation_sign(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

}  // namespace vpfix
