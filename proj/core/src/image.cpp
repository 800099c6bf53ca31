#include "vpfix/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vpfix/error.hpp"

namespace vpfix {

ScalarField::ScalarField(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative field dimensions");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ScalarField::ScalarField(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0 ||
      data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kShapeMismatch, "field data length does not match width x height");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "field has non-finite data");
  }
}

double ScalarField::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

ScalarField ScalarField::transposed() const {
  ScalarField out(height_, width_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out.at(y, x) = at(x, y);
  }
  return out;
}

ScalarField to_grayscale(const RgbImage& rgb) {
  if (!rgb.r.same_shape(rgb.g) || !rgb.r.same_shape(rgb.b)) {
    throw Error(ErrorCode::kChannelMismatch, "RGB channels differ in size");
  }
  ScalarField out(rgb.r.width(), rgb.r.height());
  auto r = rgb.r.data();
  auto g = rgb.g.data();
  auto b = rgb.b.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  }
  return out;
}

Bitmap::Bitmap(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative bitmap dimensions");
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Bitmap::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double Bitmap::coverage() const {
  return bits_.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(bits_.size());
}

Bitmap& Bitmap::operator|=(const Bitmap& o) {
  if (!same_shape(o)) throw Error(ErrorCode::kShapeMismatch, "bitmap union of unequal shapes");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
  return *this;
}

bool Bitmap::contains(const Bitmap& o) const {
  if (!same_shape(o)) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (o.bits_[i] && !bits_[i]) return false;
  }
  return true;
}

}  // namespace vpfix
