#include "vpfix_test/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace vpfix::test {
namespace {

constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

Mat3 rot_x(double a) {
  return {{{1, 0, 0}, {0, std::cos(a), -std::sin(a)}, {0, std::sin(a), std::cos(a)}}};
}
Mat3 rot_y(double a) {
  return {{{std::cos(a), 0, std::sin(a)}, {0, 1, 0}, {-std::sin(a), 0, std::cos(a)}}};
}
Mat3 rot_z(double a) {
  return {{{std::cos(a), -std::sin(a), 0}, {std::sin(a), std::cos(a), 0}, {0, 0, 1}}};
}

Vec3 column(const Mat3& m, int j) { return {m[0][j], m[1][j], m[2][j]}; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void draw_line_aa(ScalarField& img, Point2 a, Point2 b, double width) {
  const double half = 0.5 * width;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - half - 1)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + half + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - half - 1)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + half + 1)));
  constexpr int kSub = 4;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const Point2 p{x - 0.5 + (sx + 0.5) / kSub, y - 0.5 + (sy + 0.5) / kSub};
          if (point_segment_distance(p, a, b) <= half) ++hits;
        }
      }
      const double v = static_cast<double>(hits) / (kSub * kSub);
      img.at(x, y) = std::max(img.at(x, y), v);
    }
  }
}

ScalarField line_image(int width, int height, Point2 a, Point2 b, double line_width) {
  ScalarField img(width, height);
  draw_line_aa(img, a, b, line_width);
  return img;
}

ScalarField plus_image(int size) {
  ScalarField img(size, size);
  const double c = 0.5 * (size - 1);
  const double arm = 0.4 * size;
  draw_line_aa(img, {c - arm, c}, {c + arm, c}, 3.0);
  draw_line_aa(img, {c, c - arm}, {c, c + arm}, 3.0);
  return img;
}

ScalarField step_edge_image(int size, double angle_deg) {
  ScalarField img(size, size);
  const double a = angle_deg * kPi / 180.0;
  const Point2 normal{std::cos(a), std::sin(a)};
  const double c = 0.5 * (size - 1);
  constexpr int kSub = 16;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const Point2 p{x - 0.5 + (sx + 0.5) / kSub - c, y - 0.5 + (sy + 0.5) / kSub - c};
          if (dot(normal, p) > 0.0) ++hits;
        }
      }
      img.at(x, y) = static_cast<double>(hits) / (kSub * kSub);
    }
  }
  return img;
}

ScalarField smooth_edge_image(int size, double angle_deg, double sigma) {
  ScalarField img(size, size);
  const double a = angle_deg * kPi / 180.0;
  const Point2 normal{std::cos(a), std::sin(a)};
  const double c = 0.5 * (size - 1);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d = dot(normal, Point2{x - c, y - c});
      img.at(x, y) = 0.5 * (1.0 + std::erf(d / (std::sqrt(2.0) * sigma)));
    }
  }
  return img;
}

Point2 project(const CameraIntrinsics& k, const std::array<double, 3>& p) {
  return {k.fx * p[0] / p[2] + k.cx, k.fy * p[1] / p[2] + k.cy};
}

BoxScene box_scene(std::uint64_t seed, int size) {
  std::mt19937_64 rng(seed);
  const double yaw = uniform(rng, 25.0, 65.0) * kPi / 180.0;
  const double pitch = uniform(rng, 15.0, 35.0) * kPi / 180.0;
  const double roll = uniform(rng, -10.0, 10.0) * kPi / 180.0;
  const Vec3 half{uniform(rng, 0.8, 1.5), uniform(rng, 0.8, 1.5), uniform(rng, 0.8, 1.5)};
  const double dist = uniform(rng, 6.0, 7.5);
  const Mat3 r = multiply(rot_z(roll), multiply(rot_x(-pitch), rot_y(yaw)));

  BoxScene scene;
  scene.k = CameraIntrinsics{static_cast<double>(size), static_cast<double>(size), size / 2.0,
                             size / 2.0};
  scene.image = ScalarField(size, size);
  for (int j = 0; j < 3; ++j) {
    const Vec3 d = column(r, j);
    scene.vps.emplace_back(scene.k.fx * d[0] + scene.k.cx * d[2],
                           scene.k.fy * d[1] + scene.k.cy * d[2], d[2]);
  }

  auto world = [&](double u, double v, double w) {
    const Vec3 local{u * half[0], v * half[1], w * half[2]};
    Vec3 p{0.0, 0.0, dist};
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) p[i] += r[i][k] * local[k];
    }
    return project(scene.k, p);
  };
  // For each axis: four edges (offsets +-1) and four face midlines (one offset 0).
  const std::array<std::array<double, 2>, 8> offsets{
      {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}, {0, -1}, {0, 1}, {-1, 0}, {1, 0}}};
  for (int axis = 0; axis < 3; ++axis) {
    for (const auto& o : offsets) {
      std::array<double, 3> a{};
      std::array<double, 3> b{};
      a[axis] = -1.0;
      b[axis] = 1.0;
      a[(axis + 1) % 3] = b[(axis + 1) % 3] = o[0];
      a[(axis + 2) % 3] = b[(axis + 2) % 3] = o[1];
      draw_line_aa(scene.image, world(a[0], a[1], a[2]), world(b[0], b[1], b[2]), 1.5);
    }
  }
  return scene;
}

CorridorScene corridor_scene(int width, int height) {
  const CameraIntrinsics k{0.8 * width, 0.8 * width, 0.45 * width, 0.55 * height};
  ScalarField img(width, height);
  auto line3 = [&](std::array<double, 3> a, std::array<double, 3> b) {
    draw_line_aa(img, project(k, a), project(k, b), 1.5);
  };
  constexpr double kNear = 1.5;
  constexpr double kFar = 14.0;
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    line3({x, 0.8, kNear}, {x, 0.8, kFar});
    line3({x, -0.8, kNear}, {x, -0.8, kFar});
  }
  for (double y : {-0.4, 0.0, 0.4}) {
    line3({-1.0, y, kNear}, {-1.0, y, kFar});
    line3({1.0, y, kNear}, {1.0, y, kFar});
  }
  for (double z : {3.0, 5.0, 8.0}) {
    line3({-1.0, -0.8, z}, {-1.0, 0.8, z});
    line3({1.0, -0.8, z}, {1.0, 0.8, z});
  }
  return {img, HomogeneousPoint(k.cx, k.cy, 1.0)};
}

std::vector<LineSegment> bundle_through(Point2 vp, int count, double jitter, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, jitter > 0.0 ? jitter : 1.0);
  std::vector<LineSegment> out;
  while (static_cast<int>(out.size()) < count) {
    const Point2 mid{uniform(rng, 0.0, 512.0), uniform(rng, 0.0, 512.0)};
    const Point2 to_vp = vp - mid;
    const double dist = norm(to_vp);
    const double half = uniform(rng, 30.0, 75.0);
    if (dist < half + 20.0) continue;
    const Point2 dir = (1.0 / dist) * to_vp;
    Point2 a = mid - half * dir;
    Point2 b = mid + half * dir;
    if (jitter > 0.0) {
      a = a + Point2{noise(rng), noise(rng)};
      b = b + Point2{noise(rng), noise(rng)};
    }
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace vpfix::test
