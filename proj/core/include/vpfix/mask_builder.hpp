#pragma once

#include <array>
#include <vector>

#include "vpfix/geometry.hpp"
#include "vpfix/image.hpp"

namespace vpfix {

/// A misaligned outline as it appears in the image and the corrected outline the user wants.
struct OutlinePair {
  LineSegment original;
  LineSegment desired;

  /// Throws InvalidArgument when the two segments coincide within 1e-6.
  void validate() const;
};

using Quad = std::array<Point2, 4>;

/// Matches endpoints by minimum total distance and orders them into a simple
/// quadrilateral: o0, o1, match(o1), match(o0). Throws DegenerateRegion below 1 px^2.
Quad pair_endpoints(const OutlinePair& pair);

/// Absolute shoelace area.
double polygon_area(const Quad& quad);

/// Even-odd scanline fill sampled at pixel centers; centers on an edge count as inside.
Bitmap rasterize_polygon(const Quad& quad, int width, int height);

/// Dilation by a Chebyshev square for radius <= 2, by a Euclidean disc above that.
Bitmap dilate(const Bitmap& mask, int radius);

struct MaskResult {
  Bitmap mask;
  /// Fraction of set pixels after dilation.
  double coverage = 0.0;
  /// Pairs skipped because their region was degenerate.
  std::size_t degenerate_pairs = 0;
};

/// Union over pairs of the between-region (the filled quad plus both rasterized
/// outlines), then dilated. Throws DegenerateRegion when every pair is degenerate.
MaskResult build_mask(const std::vector<OutlinePair>& pairs, int width, int height,
                      int dilation);

}  // namespace vpfix
