#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vpfix {

/// Row-major grid of reals.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int width, int height, double fill = 0.0);
  ScalarField(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const ScalarField& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  double& at(int x, int y) { return data_[index(x, y)]; }
  double at(int x, int y) const { return data_[index(x, y)]; }
  /// Border-replicating access.
  double clamped(int x, int y) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  ScalarField transposed() const;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Three equally-sized channels with values in [0, 1].
struct RgbImage {
  ScalarField r;
  ScalarField g;
  ScalarField b;
};

/// Luma 0.299 R + 0.587 G + 0.114 B. Throws ChannelMismatch on unequal shapes.
ScalarField to_grayscale(const RgbImage& rgb);

/// Binary raster; each cell is 0 or 1.
class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool same_shape(const Bitmap& o) const { return width_ == o.width_ && height_ == o.height_; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }
  /// Sets the cell when it lies inside the raster; no-op otherwise.
  void set_clipped(int x, int y) {
    if (in_bounds(x, y)) set(x, y);
  }

  std::size_t count() const;
  double coverage() const;
  /// Cellwise OR; shapes must match.
  Bitmap& operator|=(const Bitmap& o);
  /// True when every set cell of `o` is set here.
  bool contains(const Bitmap& o) const;

  std::span<const std::uint8_t> cells() const { return bits_; }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Row-major integer label grid; 0 is background.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;

  std::int32_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

}  // namespace vpfix
