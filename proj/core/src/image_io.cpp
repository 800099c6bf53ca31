#include "vpfix/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cstring>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "vpfix/error.hpp"

namespace vpfix::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_read(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

enum class Container { kPng, kJpeg };

Container sniff(std::FILE* f, const std::filesystem::path& path) {
  std::array<unsigned char, 8> head{};
  const std::size_t n = std::fread(head.data(), 1, head.size(), f);
  std::rewind(f);
  if (n >= 8 && png_sig_cmp(head.data(), 0, 8) == 0) return Container::kPng;
  if (n >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) return Container::kJpeg;
  throw Error(ErrorCode::kFormat, "not a PNG or JPEG file: " + path.string());
}

// Decoded samples in native bit depth (8 or 16), row-major, interleaved.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;

  double normalized(std::size_t i) const {
    return samples[i] / (bit_depth == 16 ? 65535.0 : 255.0);
  }
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

RawImage decode_png(std::FILE* f, const std::filesystem::path& path) {
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn,
                                           png_warning_fn);
  if (!png) throw Error(ErrorCode::kInternal, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  RawImage img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kFormat, "PNG decode failed for " + path.string() + ": " + message);
  }
  png_init_io(png, f);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  img.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(rowbytes * static_cast<std::size_t>(img.height));
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(count);
  if (img.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint16_t v;
      std::memcpy(&v, buffer.data() + 2 * i, 2);
      img.samples[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) img.samples[i] = buffer[i];
  }
  return img;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

RawImage decode_jpeg(std::FILE* f, const std::filesystem::path& path, bool header_only) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  RawImage img;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::kFormat, "JPEG decode failed for " + path.string() + ": " +
                                        std::string(err.message));
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  img.width = static_cast<int>(cinfo.image_width);
  img.height = static_cast<int>(cinfo.image_height);
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return img;
  }
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img.channels = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<JSAMPLE> row(stride);
  img.samples.reserve(stride * img.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW ptr = row.data();
    jpeg_read_scanlines(&cinfo, &ptr, 1);
    img.samples.insert(img.samples.end(), row.begin(), row.end());
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

RawImage decode(const std::filesystem::path& path) {
  FilePtr f = open_for_read(path);
  return sniff(f.get(), path) == Container::kPng ? decode_png(f.get(), path)
                                                 : decode_jpeg(f.get(), path, false);
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

std::vector<std::uint8_t> encode(int width, int height, int color_type, int bit_depth,
                                 const std::vector<std::uint8_t>& pixels) {
  std::vector<std::uint8_t> out;
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn,
                                            png_warning_fn);
  if (!png) throw Error(ErrorCode::kInternal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kInternal, "PNG encode failed: " + message);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 9);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + stride * y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
  const RawImage raw = decode(path);
  RgbImage rgb{ScalarField(raw.width, raw.height), ScalarField(raw.width, raw.height),
               ScalarField(raw.width, raw.height)};
  const int color_channels = raw.channels >= 3 ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t base = i * raw.channels;
    rgb.r.data()[i] = raw.normalized(base);
    rgb.g.data()[i] = raw.normalized(base + (color_channels == 3 ? 1 : 0));
    rgb.b.data()[i] = raw.normalized(base + (color_channels == 3 ? 2 : 0));
  }
  return rgb;
}

ScalarField read_gray(const std::filesystem::path& path) { return to_grayscale(read_rgb(path)); }

LabelMap read_labels(const std::filesystem::path& path) {
  FilePtr f = open_for_read(path);
  if (sniff(f.get(), path) != Container::kPng) {
    throw Error(ErrorCode::kFormat, "label maps must be PNG: " + path.string());
  }
  const RawImage raw = decode_png(f.get(), path);
  if (raw.channels != 1) {
    throw Error(ErrorCode::kFormat, "label map must be single-channel: " + path.string());
  }
  LabelMap out{raw.width, raw.height, {}};
  out.labels.assign(raw.samples.begin(), raw.samples.end());
  return out;
}

ImageSize read_size(const std::filesystem::path& path) {
  FilePtr f = open_for_read(path);
  if (sniff(f.get(), path) == Container::kJpeg) {
    const RawImage raw = decode_jpeg(f.get(), path, true);
    return {raw.width, raw.height};
  }
  // IHDR follows the 8-byte signature and the 8-byte chunk header.
  std::array<unsigned char, 24> head{};
  if (std::fread(head.data(), 1, head.size(), f.get()) != head.size()) {
    throw Error(ErrorCode::kFormat, "truncated PNG header: " + path.string());
  }
  auto be32 = [&](int off) {
    return static_cast<int>((head[off] << 24) | (head[off + 1] << 16) | (head[off + 2] << 8) |
                            head[off + 3]);
  };
  return {be32(16), be32(20)};
}

std::vector<std::uint8_t> encode_png(const Bitmap& bits) {
  std::vector<std::uint8_t> px(bits.cells().size());
  std::transform(bits.cells().begin(), bits.cells().end(), px.begin(),
                 [](std::uint8_t b) { return b ? std::uint8_t{255} : std::uint8_t{0}; });
  return encode(bits.width(), bits.height(), PNG_COLOR_TYPE_GRAY, 8, px);
}

std::vector<std::uint8_t> encode_png(const ScalarField& gray) {
  std::vector<std::uint8_t> px(gray.size());
  std::transform(gray.data().begin(), gray.data().end(), px.begin(), to_byte);
  return encode(gray.width(), gray.height(), PNG_COLOR_TYPE_GRAY, 8, px);
}

std::vector<std::uint8_t> encode_png(const RgbImage& rgb) {
  if (!rgb.r.same_shape(rgb.g) || !rgb.r.same_shape(rgb.b)) {
    throw Error(ErrorCode::kChannelMismatch, "RGB channels differ in size");
  }
  std::vector<std::uint8_t> px(rgb.r.size() * 3);
  for (std::size_t i = 0; i < rgb.r.size(); ++i) {
    px[3 * i] = to_byte(rgb.r.data()[i]);
    px[3 * i + 1] = to_byte(rgb.g.data()[i]);
    px[3 * i + 2] = to_byte(rgb.b.data()[i]);
  }
  return encode(rgb.r.width(), rgb.r.height(), PNG_COLOR_TYPE_RGB, 8, px);
}

std::vector<std::uint8_t> encode_png(const LabelMap& labels) {
  std::vector<std::uint8_t> px(labels.labels.size() * 2);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(std::clamp(labels.labels[i], 0, 65535));
    px[2 * i] = static_cast<std::uint8_t>(v >> 8);
    px[2 * i + 1] = static_cast<std::uint8_t>(v & 0xFF);
  }
  return encode(labels.width, labels.height, PNG_COLOR_TYPE_GRAY, 16, px);
}

Bitmap read_bitmap(const std::filesystem::path& path) {
  const RawImage raw = decode(path);
  Bitmap out(raw.width, raw.height);
  const std::uint16_t half = raw.bit_depth == 16 ? 32768 : 128;
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      if (raw.samples[i] >= half) out.set(x, y);
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace vpfix::io
