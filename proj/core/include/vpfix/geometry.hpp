#pragma once

#include <array>
#include <cmath>
#include <optional>

namespace vpfix {

/// Pixel coordinates. Pixel (col, row) has its center at (col, row).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

double norm(Point2 v);
double dot(Point2 a, Point2 b);
/// z-component of the 3D cross product.
double cross(Point2 a, Point2 b);

/// Vanishing point in projective 2D coordinates; w == 0 is a point at infinity.
class HomogeneousPoint {
 public:
  /// Throws InvalidArgument when all components are zero or any is non-finite.
  HomogeneousPoint(double x, double y, double w);

  static HomogeneousPoint finite(Point2 p) { return {p.x, p.y, 1.0}; }
  static HomogeneousPoint at_infinity(double dx, double dy) { return {dx, dy, 0.0}; }

  double x() const { return x_; }
  double y() const { return y_; }
  double w() const { return w_; }

  /// Unit-norm representative, sign chosen so the first nonzero component is positive.
  HomogeneousPoint normalized() const;

  /// True when |w| is below `tol` after normalization.
  bool is_at_infinity(double tol = 1e-12) const;

  /// Euclidean point; empty for points at infinity.
  std::optional<Point2> euclidean() const;

  std::array<double, 3> components() const { return {x_, y_, w_}; }

 private:
  double x_;
  double y_;
  double w_;
};

class LineSegment {
 public:
  static constexpr double kMinLength = 1e-9;

  /// Throws InvalidArgument when the endpoints coincide or are non-finite.
  LineSegment(Point2 p0, Point2 p1);

  Point2 p0() const { return p0_; }
  Point2 p1() const { return p1_; }
  Point2 midpoint() const { return 0.5 * (p0_ + p1_); }
  double length() const { return norm(p1_ - p0_); }

  friend bool operator==(const LineSegment&, const LineSegment&) = default;

 private:
  Point2 p0_;
  Point2 p1_;
};

class UnitVector2 {
 public:
  /// Normalizes (dx, dy); throws DegenerateDirection when its norm is below 1e-9.
  static UnitVector2 from(double dx, double dy);

  double dx() const { return dx_; }
  double dy() const { return dy_; }
  UnitVector2 operator-() const { return UnitVector2(-dx_, -dy_); }

 private:
  UnitVector2(double dx, double dy) : dx_(dx), dy_(dy) {}
  double dx_;
  double dy_;
};

struct UnitVector3 {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws InvalidArgument unless fx > 0 and fy > 0.
  void validate() const;

  /// fx = fy = max(width, height), principal point at the image center.
  static CameraIntrinsics default_for(int width, int height);
};

/// Unit direction from `pixel` toward `vp`; pixel-independent for points at infinity.
UnitVector2 vp_direction_at(const HomogeneousPoint& vp, Point2 pixel);

/// Angle between two undirected lines, in [0, pi/2].
double undirected_angle(const UnitVector2& a, const UnitVector2& b);

/// Undirected angle between the segment and the VP direction at its midpoint.
double segment_vp_deviation(const LineSegment& seg, const HomogeneousPoint& vp);

/// Homogeneous line coefficients (a, b, c) with a^2 + b^2 = 1.
std::array<double, 3> line_coefficients(const LineSegment& seg);

/// Intersection of the two infinite lines; parallel lines give w = 0.
HomogeneousPoint intersect_lines(const LineSegment& a, const LineSegment& b);

/// Camera-space direction of the 3D line family vanishing at `vp`.
UnitVector3 backproject_direction(const CameraIntrinsics& k, const HomogeneousPoint& vp);

/// Angle between the back-projected directions of two VPs, in [0, pi/2].
double camera_angle_error(const CameraIntrinsics& k, const HomogeneousPoint& a,
                          const HomogeneousPoint& b);

/// Euclidean distance from `p` to the closed segment [a, b].
double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// True when the closed segments [a0, a1] and [b0, b1] share a point.
bool segments_intersect(Point2 a0, Point2 a1, Point2 b0, Point2 b1);

constexpr double deg_to_rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / 3.14159265358979323846; }

}  // namespace vpfix
