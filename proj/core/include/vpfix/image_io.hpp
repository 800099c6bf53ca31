#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vpfix/image.hpp"

namespace vpfix::io {

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Reads PNG or JPEG (by content). Gray inputs fill all three channels; alpha is dropped.
RgbImage read_rgb(const std::filesystem::path& path);

/// Reads a PNG or JPEG as luma in [0, 1].
ScalarField read_gray(const std::filesystem::path& path);

/// Reads a single-channel 8- or 16-bit PNG as raw integer labels.
LabelMap read_labels(const std::filesystem::path& path);

/// Header-only probe; throws Io/Format.
ImageSize read_size(const std::filesystem::path& path);

/// 8-bit grayscale PNG; set cells become 255. Output bytes are deterministic.
std::vector<std::uint8_t> encode_png(const Bitmap& bits);
/// 8-bit grayscale PNG of values clamped to [0, 1].
std::vector<std::uint8_t> encode_png(const ScalarField& gray);
/// 8-bit RGB PNG of values clamped to [0, 1].
std::vector<std::uint8_t> encode_png(const RgbImage& rgb);
/// 16-bit grayscale PNG of labels in [0, 65535].
std::vector<std::uint8_t> encode_png(const LabelMap& labels);

/// Reads an 8-bit PNG as a bitmap: values >= 128 are set.
Bitmap read_bitmap(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace vpfix::io
