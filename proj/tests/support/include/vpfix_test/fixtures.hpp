#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vpfix/geometry.hpp"
#include "vpfix/image.hpp"

namespace vpfix::test {

/// Adds an anti-aliased line of the given width (intensity = covered area fraction,
/// 4x4 supersampling), combining with existing content by max.
void draw_line_aa(ScalarField& img, Point2 a, Point2 b, double width = 1.5);

/// Blank canvas with one anti-aliased line.
ScalarField line_image(int width, int height, Point2 a, Point2 b, double line_width = 1.5);

/// '+' made of one horizontal and one vertical bar through the image center.
ScalarField plus_image(int size);

/// Half-plane step edge through the image center. The edge runs vertically when
/// `angle_deg` is 0 and is rotated clockwise (as displayed) by `angle_deg`.
/// Pixels are box-filtered (area coverage), values 0 left, 1 right.
ScalarField step_edge_image(int size, double angle_deg);

/// Step edge through the centre with an erf profile of width `sigma` px, rotated like
/// step_edge_image. Sobel recovers its orientation to well under a degree.
ScalarField smooth_edge_image(int size, double angle_deg, double sigma);

/// Pinhole projection of a 3D point in camera coordinates.
Point2 project(const CameraIntrinsics& k, const std::array<double, 3>& p);

struct BoxScene {
  ScalarField image;
  CameraIntrinsics k;
  /// One VP per box axis direction.
  std::vector<HomogeneousPoint> vps;
};

/// A randomly posed wireframe box (edges plus face midlines) in front of the camera.
BoxScene box_scene(std::uint64_t seed, int size = 320);

struct CorridorScene {
  ScalarField image;
  HomogeneousPoint vp;
};

/// Corridor seen along its axis: floor, ceiling and wall lines converge at one VP.
CorridorScene corridor_scene(int width = 320, int height = 240);

/// `count` segments aimed at `vp` with Gaussian endpoint jitter (sigma in px), midpoints
/// uniform on a 512x512 canvas.
std::vector<LineSegment> bundle_through(Point2 vp, int count, double jitter, std::uint64_t seed);

}  // namespace vpfix::test
