#pragma once

#include <cstdint>
#include <vector>

#include "vpfix/geometry.hpp"
#include "vpfix/image.hpp"

namespace vpfix {

/// Ordered vertices. Closed polylines repeat their first vertex at the end.
struct Polyline {
  std::vector<Point2> points;
  bool closed = false;

  /// Throws InvalidArgument unless there are >= 2 points, consecutive points differ,
  /// and closed polylines end where they start.
  void validate() const;
};

/// A polygon edge selected for one VP of the image.
struct OutlineEdge {
  LineSegment seg;
  std::size_t vp_index = 0;
  /// Undirected angle between the edge and the VP direction at its midpoint, radians.
  double deviation = 0.0;
};

struct ContourOptions {
  /// Components with fewer pixels are dropped.
  int min_component_pixels = 16;
};

/// Outer boundary of every 8-connected component of each non-zero label, traced with
/// Moore-neighbor tracing. Vertices sit on pixel centers; loops are counter-clockwise
/// as displayed (y down), i.e. negative shoelace sum in pixel coordinates.
std::vector<Polyline> trace_contours(const LabelMap& seg, const ContourOptions& opts = {});

/// Ramer-Douglas-Peucker with point-to-segment distances. Closed inputs are split at
/// their two mutually farthest vertices and rejoined.
Polyline douglas_peucker(const Polyline& line, double epsilon);

/// Every (edge, VP) pair whose deviation is <= theta. Edges may repeat for several VPs.
std::vector<OutlineEdge> select_vp_aligned_edges(const std::vector<Polyline>& polys,
                                                 const std::vector<HomogeneousPoint>& vps,
                                                 double theta);

/// Integer line traversal of each segment (endpoints rounded to pixel centers),
/// thickened with a line_width x line_width square, clipped to the raster.
Bitmap render_condition(const std::vector<OutlineEdge>& edges, int width, int height,
                        int line_width);

/// Rasterizes one segment onto `out` with the same rules as render_condition.
void draw_segment(Bitmap& out, const LineSegment& seg, int line_width);

/// Independent Bernoulli(keep_prob) retention per edge, order preserved.
std::vector<OutlineEdge> sample_training_condition(const std::vector<OutlineEdge>& edges,
                                                   double keep_prob, std::uint64_t rng_seed);

}  // namespace vpfix
