#include "vpfix/dataset_pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "detail/rng.hpp"
#include "vpfix/error.hpp"

namespace vpfix {
namespace {

// Moore neighborhood in clockwise order as displayed (y down), starting west.
constexpr std::array<std::array<int, 2>, 8> kMoore{
    {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int moore_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kMoore[i][0] == dx && kMoore[i][1] == dy) return i;
  }
  return -1;
}

struct Component {
  int id = 0;
  int start_x = 0;
  int start_y = 0;
  int pixels = 0;
};

std::vector<Point2> moore_trace(const std::vector<int>& comp, int width, int height,
                                const Component& c) {
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < width && y < height &&
           comp[static_cast<std::size_t>(y) * width + x] == c.id;
  };
  std::vector<Point2> contour{{static_cast<double>(c.start_x), static_cast<double>(c.start_y)}};
  int px = c.start_x;
  int py = c.start_y;
  // The start is the first pixel of its component in raster order, so its west
  // neighbor is outside.
  int back = 0;
  const int start_back = back;
  const std::size_t max_steps = 4 * static_cast<std::size_t>(c.pixels) + 16;
  for (std::size_t step = 0; step < max_steps; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int idx = (back + k) % 8;
      if (inside(px + kMoore[idx][0], py + kMoore[idx][1])) {
        found = idx;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const int prev = (found + 7) % 8;
    const int qx = px + kMoore[found][0];
    const int qy = py + kMoore[found][1];
    back = moore_index(px + kMoore[prev][0] - qx, py + kMoore[prev][1] - qy);
    px = qx;
    py = qy;
    // Jacob's stopping criterion: re-entering the start the way we first left it.
    if (px == c.start_x && py == c.start_y && back == start_back) break;
    contour.push_back({static_cast<double>(px), static_cast<double>(py)});
  }
  return contour;
}

void simplify_range(const std::vector<Point2>& pts, std::size_t first, std::size_t last,
                    double epsilon, std::vector<char>& keep) {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{first, last}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (j <= i + 1) continue;
    double max_dist = -1.0;
    std::size_t index = i;
    for (std::size_t k = i + 1; k < j; ++k) {
      const double d = point_segment_distance(pts[k], pts[i], pts[j]);
      if (d > max_dist) {
        max_dist = d;
        index = k;
      }
    }
    if (max_dist > epsilon) {
      keep[index] = 1;
      stack.push_back({index, j});
      stack.push_back({i, index});
    }
  }
}

std::vector<Point2> simplify_open(const std::vector<Point2>& pts, double epsilon) {
  if (pts.size() <= 2) return pts;
  std::vector<char> keep(pts.size(), 0);
  keep[0] = 1;
  keep[pts.size() - 1] = 1;
  simplify_range(pts, 0, pts.size() - 1, epsilon, keep);
  std::vector<Point2> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (keep[i]) out.push_back(pts[i]);
  }
  return out;
}

// Liang-Barsky clip of p0->p1 against [lo, hi] boxes; empty when fully outside.
std::optional<std::pair<Point2, Point2>> clip(Point2 p0, Point2 p1, Point2 lo, Point2 hi) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Point2 d = p1 - p0;
  const std::array<double, 4> p{-d.x, d.x, -d.y, d.y};
  const std::array<double, 4> q{p0.x - lo.x, hi.x - p0.x, p0.y - lo.y, hi.y - p0.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(p0 + t0 * d, p0 + t1 * d);
}

}  // namespace

void Polyline::validate() const {
  if (points.size() < 2) throw Error(ErrorCode::kInvalidArgument, "polyline needs >= 2 points");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] == points[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "polyline has repeated consecutive points");
    }
  }
  if (closed && !(points.front() == points.back())) {
    throw Error(ErrorCode::kInvalidArgument, "closed polyline must end at its first point");
  }
}

std::vector<Polyline> trace_contours(const LabelMap& seg, const ContourOptions& opts) {
  const int w = seg.width;
  const int h = seg.height;
  if (w <= 0 || h <= 0 ||
      seg.labels.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
    throw Error(ErrorCode::kInvalidArgument, "label map dimensions are invalid");
  }
  std::vector<int> comp(seg.labels.size(), 0);
  std::vector<Polyline> out;
  int next_id = 0;
  std::vector<std::size_t> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const std::int32_t label = seg.labels[i];
      if (label < 0) throw Error(ErrorCode::kInvalidArgument, "negative label");
      if (label == 0 || comp[i] != 0) continue;
      Component c{++next_id, x, y, 0};
      queue.assign(1, i);
      comp[i] = c.id;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const int cx = static_cast<int>(queue[head] % w);
        const int cy = static_cast<int>(queue[head] / w);
        ++c.pixels;
        for (const auto& d : kMoore) {
          const int nx = cx + d[0];
          const int ny = cy + d[1];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
          if (comp[ni] == 0 && seg.labels[ni] == label) {
            comp[ni] = c.id;
            queue.push_back(ni);
          }
        }
      }
      if (c.pixels < opts.min_component_pixels) continue;
      std::vector<Point2> cw = moore_trace(comp, w, h, c);
      if (cw.size() < 2) continue;
      Polyline poly{{cw.front()}, true};
      poly.points.insert(poly.points.end(), cw.rbegin(), cw.rend() - 1);
      poly.points.push_back(cw.front());
      out.push_back(std::move(poly));
    }
  }
  return out;
}

Polyline douglas_peucker(const Polyline& line, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  if (!line.closed) return {simplify_open(line.points, epsilon), false};

  std::vector<Point2> ring = line.points;
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  const std::size_t n = ring.size();
  if (n < 3) {
    Polyline copy = line;
    return copy;
  }
  std::size_t a = 0;
  std::size_t b = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2 d = ring[j] - ring[i];
      const double d2 = d.x * d.x + d.y * d.y;
      if (d2 > best) {
        best = d2;
        a = i;
        b = j;
      }
    }
  }
  std::vector<Point2> first(ring.begin() + static_cast<std::ptrdiff_t>(a),
                            ring.begin() + static_cast<std::ptrdiff_t>(b) + 1);
  std::vector<Point2> second(ring.begin() + static_cast<std::ptrdiff_t>(b), ring.end());
  second.insert(second.end(), ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(a) + 1);
  Polyline out{simplify_open(first, epsilon), true};
  const auto tail = simplify_open(second, epsilon);
  out.points.insert(out.points.end(), tail.begin() + 1, tail.end());
  return out;
}

std::vector<OutlineEdge> select_vp_aligned_edges(const std::vector<Polyline>& polys,
                                                 const std::vector<HomogeneousPoint>& vps,
                                                 double theta) {
  if (!(theta > 0.0 && theta < std::acos(0.0))) {
    throw Error(ErrorCode::kInvalidArgument, "theta must lie in (0, pi/2)");
  }
  std::vector<OutlineEdge> out;
  for (const auto& poly : polys) {
    for (std::size_t i = 0; i + 1 < poly.points.size(); ++i) {
      if (poly.points[i] == poly.points[i + 1]) continue;
      const LineSegment seg(poly.points[i], poly.points[i + 1]);
      for (std::size_t v = 0; v < vps.size(); ++v) {
        double dev = 0.0;
        try {
          dev = segment_vp_deviation(seg, vps[v]);
        } catch (const Error&) {
          continue;  // VP sits on the midpoint
        }
        if (dev <= theta) out.push_back({seg, v, dev});
      }
    }
  }
  return out;
}

void draw_segment(Bitmap& out, const LineSegment& seg, int line_width) {
  const double margin = static_cast<double>(line_width) + 1.0;
  const auto clipped = clip(seg.p0(), seg.p1(), {-margin, -margin},
                            {out.width() - 1 + margin, out.height() - 1 + margin});
  if (!clipped) return;
  long x0 = std::lround(clipped->first.x);
  long y0 = std::lround(clipped->first.y);
  const long x1 = std::lround(clipped->second.x);
  const long y1 = std::lround(clipped->second.y);
  const int lo = -(line_width - 1) / 2;
  const int hi = line_width / 2;
  auto stamp = [&](long cx, long cy) {
    for (int dy = lo; dy <= hi; ++dy) {
      for (int dx = lo; dx <= hi; ++dx) {
        out.set_clipped(static_cast<int>(cx + dx), static_cast<int>(cy + dy));
      }
    }
  };
  // Bresenham.
  const long dx = std::labs(x1 - x0);
  const long dy = -std::labs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1;
  const long sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    stamp(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

Bitmap render_condition(const std::vector<OutlineEdge>& edges, int width, int height,
                        int line_width) {
  if (line_width < 1) throw Error(ErrorCode::kInvalidArgument, "line_width must be >= 1");
  Bitmap out(width, height);
  for (const auto& e : edges) draw_segment(out, e.seg, line_width);
  return out;
}

std::vector<OutlineEdge> sample_training_condition(const std::vector<OutlineEdge>& edges,
                                                   double keep_prob, std::uint64_t rng_seed) {
  if (!(keep_prob >= 0.0 && keep_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "keep_prob must lie in [0, 1]");
  }
  detail::SplitMix64 rng(rng_seed);
  std::vector<OutlineEdge> out;
  for (const auto& e : edges) {
    if (rng.uniform() < keep_prob) out.push_back(e);
  }
  return out;
}

}  // namespace vpfix
