#include "vpfix/mask_builder.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "vpfix/dataset_pipeline.hpp"
#include "vpfix/error.hpp"

namespace vpfix {
namespace {

constexpr double kOnEdgeTolerance = 1e-9;

double shoelace(const Quad& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += cross(q[i], q[(i + 1) % 4]);
  return 0.5 * s;
}

double triangle_area(Point2 a, Point2 b, Point2 c) { return 0.5 * std::abs(cross(b - a, c - a)); }

bool self_intersecting(const Quad& q) {
  return segments_intersect(q[0], q[1], q[2], q[3]) || segments_intersect(q[1], q[2], q[3], q[0]);
}

std::optional<Point2> line_crossing(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
  const Point2 r = a1 - a0;
  const Point2 s = b1 - b0;
  const double denom = cross(r, s);
  if (denom == 0.0) return std::nullopt;
  const double t = cross(b0 - a0, s) / denom;
  return a0 + t * r;
}

// Edge with endpoints ordered so the same edge always yields the same arithmetic,
// whichever direction the polygon traverses it.
struct Edge {
  Point2 lo;
  Point2 hi;
};

Edge canonical(Point2 a, Point2 b) {
  if (a.y < b.y || (a.y == b.y && a.x <= b.x)) return {a, b};
  return {b, a};
}

bool near_integer(double v) { return std::abs(v - std::round(v)) <= kOnEdgeTolerance; }

}  // namespace

void OutlinePair::validate() const {
  const bool same = norm(original.p0() - desired.p0()) < 1e-6 &&
                    norm(original.p1() - desired.p1()) < 1e-6;
  const bool reversed = norm(original.p0() - desired.p1()) < 1e-6 &&
                        norm(original.p1() - desired.p0()) < 1e-6;
  if (same || reversed) {
    throw Error(ErrorCode::kInvalidArgument, "original and desired outlines coincide");
  }
}

double polygon_area(const Quad& quad) {
  if (!self_intersecting(quad)) return std::abs(shoelace(quad));
  // Bow-tie: two triangles meeting at the crossing of a pair of opposite edges.
  for (int k = 0; k < 2; ++k) {
    const Point2 a0 = quad[k];
    const Point2 a1 = quad[k + 1];
    const Point2 b0 = quad[k + 2];
    const Point2 b1 = quad[(k + 3) % 4];
    if (!segments_intersect(a0, a1, b0, b1)) continue;
    const auto x = line_crossing(a0, a1, b0, b1);
    if (!x) return 0.0;  // collinear overlap
    return triangle_area(a1, b0, *x) + triangle_area(b1, a0, *x);
  }
  return std::abs(shoelace(quad));
}

Quad pair_endpoints(const OutlinePair& pair) {
  const Point2 o0 = pair.original.p0();
  const Point2 o1 = pair.original.p1();
  const Point2 d0 = pair.desired.p0();
  const Point2 d1 = pair.desired.p1();
  const double straight = norm(o0 - d0) + norm(o1 - d1);
  const double crossed = norm(o0 - d1) + norm(o1 - d0);
  const Point2 m0 = straight <= crossed ? d0 : d1;
  const Point2 m1 = straight <= crossed ? d1 : d0;
  Quad quad{o0, o1, m1, m0};
  if (self_intersecting(quad)) {
    Quad alt{o0, o1, m0, m1};
    // Crossing outlines keep the bow-tie whose wedges join matched endpoints.
    if (!self_intersecting(alt)) quad = alt;
  }
  if (polygon_area(quad) < 1.0) {
    throw Error(ErrorCode::kDegenerateRegion, "region between outlines is below 1 px^2");
  }
  return quad;
}

Bitmap rasterize_polygon(const Quad& quad, int width, int height) {
  Bitmap out(width, height);
  if (width == 0 || height == 0) return out;
  std::array<Edge, 4> edges;
  double ymin = quad[0].y;
  double ymax = quad[0].y;
  for (std::size_t i = 0; i < 4; ++i) {
    edges[i] = canonical(quad[i], quad[(i + 1) % 4]);
    ymin = std::min(ymin, quad[i].y);
    ymax = std::max(ymax, quad[i].y);
  }
  const int row_lo = std::max(0, static_cast<int>(std::ceil(ymin - kOnEdgeTolerance)));
  const int row_hi = std::min(height - 1, static_cast<int>(std::floor(ymax + kOnEdgeTolerance)));
  auto fill_span = [&](int y, double xa, double xb) {
    const int lo = std::max(0, static_cast<int>(std::ceil(std::min(xa, xb) - kOnEdgeTolerance)));
    const int hi = std::min(width - 1,
                            static_cast<int>(std::floor(std::max(xa, xb) + kOnEdgeTolerance)));
    for (int x = lo; x <= hi; ++x) out.set(x, y);
  };

  std::vector<double> xs;
  for (int y = row_lo; y <= row_hi; ++y) {
    const double fy = y;
    xs.clear();
    for (const auto& e : edges) {
      if (e.lo.y == e.hi.y) continue;
      // Half-open in y so shared vertices are counted once.
      if (fy >= e.lo.y && fy < e.hi.y) {
        xs.push_back(e.lo.x + (fy - e.lo.y) * (e.hi.x - e.lo.x) / (e.hi.y - e.lo.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) fill_span(y, xs[i], xs[i + 1]);

    // Centers exactly on an edge belong to the polygon.
    for (const auto& e : edges) {
      if (std::abs(e.lo.y - fy) <= kOnEdgeTolerance && std::abs(e.hi.y - fy) <= kOnEdgeTolerance) {
        fill_span(y, e.lo.x, e.hi.x);
        continue;
      }
      if (fy < e.lo.y - kOnEdgeTolerance || fy > e.hi.y + kOnEdgeTolerance) continue;
      const double t = std::clamp((fy - e.lo.y) / (e.hi.y - e.lo.y), 0.0, 1.0);
      const double x = e.lo.x + t * (e.hi.x - e.lo.x);
      if (near_integer(x)) {
        const long xi = std::lround(x);
        if (xi >= 0 && xi < width) out.set(static_cast<int>(xi), y);
      }
    }
  }
  return out;
}

Bitmap dilate(const Bitmap& mask, int radius) {
  if (radius < 0) throw Error(ErrorCode::kInvalidArgument, "dilation radius must be >= 0");
  if (radius == 0) return mask;
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (radius <= 2 || dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
    }
  }
  Bitmap out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      for (const auto& [dx, dy] : offsets) out.set_clipped(x + dx, y + dy);
    }
  }
  return out;
}

MaskResult build_mask(const std::vector<OutlinePair>& pairs, int width, int height,
                      int dilation) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "build_mask needs at least one pair");
  Bitmap region(width, height);
  std::size_t degenerate = 0;
  for (const auto& pair : pairs) {
    Quad quad;
    try {
      quad = pair_endpoints(pair);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateRegion) throw;
      ++degenerate;
      continue;
    }
    region |= rasterize_polygon(quad, width, height);
    draw_segment(region, pair.original, 1);
    draw_segment(region, pair.desired, 1);
  }
  if (degenerate == pairs.size()) {
    throw Error(ErrorCode::kDegenerateRegion, "every outline pair encloses a degenerate region");
  }
  MaskResult result{dilate(region, dilation), 0.0, degenerate};
  result.coverage = result.mask.coverage();
  return result;
}

}  // namespace vpfix
