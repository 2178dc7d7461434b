#pragma once

#include <png.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facade/error.hpp"
#include "facade/image.hpp"

namespace facade {

namespace detail {

struct PngImage {
  png_image img{};
  PngImage() {
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

struct RawPng {
  int width = 0;
  int height = 0;
  bool color = false;
  bool source_gray8 = false;
  std::vector<std::uint8_t> pixels;
};

inline RawPng read_png(const std::filesystem::path& path, bool want_color) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
  PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.string().c_str()))
    throw FormatError("malformed PNG " + path.string() + ": " + p.img.message);
  RawPng raw;
  raw.width = static_cast<int>(p.img.width);
  raw.height = static_cast<int>(p.img.height);
  raw.source_gray8 = (p.img.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_LINEAR |
                                      PNG_FORMAT_FLAG_COLORMAP)) == 0;
  // Drop alpha by compositing onto black; callers never need it.
  p.img.format = want_color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  raw.color = want_color;
  raw.pixels.resize(PNG_IMAGE_SIZE(p.img));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&p.img, &black, raw.pixels.data(), 0, nullptr))
    throw FormatError("malformed PNG " + path.string() + ": " + p.img.message);
  return raw;
}

inline void write_png(const std::filesystem::path& path, int width, int height, bool color,
                      const std::vector<std::uint8_t>& pixels) {
  PngImage p;
  p.img.width = static_cast<png_uint_32>(width);
  p.img.height = static_cast<png_uint_32>(height);
  p.img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&p.img, path.string().c_str(), 0, pixels.data(), 0, nullptr))
    throw IoError("cannot write " + path.string() + ": " + p.img.message);
}

inline bool png_is_color(const std::filesystem::path& path) {
  PngImage p;
  if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
  if (!png_image_begin_read_from_file(&p.img, path.string().c_str()))
    throw FormatError("malformed PNG " + path.string() + ": " + p.img.message);
  return (p.img.format & PNG_FORMAT_FLAG_COLOR) != 0;
}

}  // namespace detail

// Loads an 8-bit image; gray sources give 1 channel, color sources 3.
inline ImageBuffer load_image_png(const std::filesystem::path& path) {
  const bool color = detail::png_is_color(path);
  auto raw = detail::read_png(path, color);
  ImageBuffer img(raw.width, raw.height, color ? 3 : 1);
  auto dst = img.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = raw.pixels[i];
  return img;
}

// Intensities are rounded and clamped to [0, 255].
inline void save_image_png(const std::filesystem::path& path, const ImageBuffer& img) {
  std::vector<std::uint8_t> px(img.data().size());
  auto src = img.data();
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(src[i]), 0L, 255L));
  detail::write_png(path, img.width(), img.height(), img.channels() == 3, px);
}

// Loads a class-index mask: an 8-bit single-channel PNG whose pixel value is
// the class index. Values >= classes are rejected.
inline LabelMask load_mask_png(const std::filesystem::path& path, int classes) {
  auto raw = detail::read_png(path, false);
  if (!raw.source_gray8)
    throw FormatError("mask " + path.string() + " is not an 8-bit grayscale PNG");
  LabelMask mask(raw.width, raw.height, classes);
  auto dst = mask.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (raw.pixels[i] >= classes)
      throw FormatError("mask " + path.string() + " has value " + std::to_string(raw.pixels[i]) +
                        " outside palette of " + std::to_string(classes) + " classes");
    dst[i] = raw.pixels[i];
  }
  return mask;
}

inline void save_mask_png(const std::filesystem::path& path, const LabelMask& mask) {
  std::vector<std::uint8_t> px(mask.data().begin(), mask.data().end());
  detail::write_png(path, mask.width(), mask.height(), false, px);
}

}  // namespace facade
