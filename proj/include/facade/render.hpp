#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "facade/image.hpp"
#include "facade/lsd.hpp"

namespace facade {

using Rgb = std::array<float, 3>;

// Fixed class colors, cycled for palettes larger than the table.
inline Rgb class_color(int k) {
  static constexpr std::array<Rgb, 9> kColors = {{
      {200, 120, 60},   // building
      {40, 120, 230},   // window
      {230, 200, 40},   // door
      {170, 40, 40},    // roof
      {40, 170, 60},    // tree
      {140, 220, 250},  // sky
      {230, 60, 200},   // person
      {90, 90, 90},     // car
      {250, 250, 250},  // sign
  }};
  return kColors[static_cast<std::size_t>(k) % kColors.size()];
}

inline ImageBuffer to_rgb(const ImageBuffer& img) {
  if (img.channels() == 3) return img;
  ImageBuffer out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
  return out;
}

inline ImageBuffer colorize(const LabelMask& mask) {
  ImageBuffer out(mask.width(), mask.height(), 3);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      const Rgb c = class_color(mask.at(x, y));
      for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = c[ch];
    }
  return out;
}

// image * (1 - alpha) + class color * alpha.
inline ImageBuffer overlay(const ImageBuffer& image, const LabelMask& mask, double alpha) {
  ImageBuffer out = to_rgb(image);
  const float a = static_cast<float>(std::clamp(alpha, 0.0, 1.0));
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      const Rgb c = class_color(mask.at(x, y));
      for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = out.at(x, y, ch) * (1 - a) + c[ch] * a;
    }
  return out;
}

inline void draw_line(ImageBuffer& img, double x1, double y1, double x2, double y2, Rgb color) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(x2 - x1), std::abs(y2 - y1)))));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const int x = static_cast<int>(std::lround(x1 + t * (x2 - x1)));
    const int y = static_cast<int>(std::lround(y1 + t * (y2 - y1)));
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
    for (int c = 0; c < img.channels() && c < 3; ++c) img.at(x, y, c) = color[c];
  }
}

inline void draw_segment(ImageBuffer& img, const LineSegment& s, Rgb color) {
  draw_line(img, s.x1, s.y1, s.x2, s.y2, color);
}

inline void draw_rect(ImageBuffer& img, const Rect& r, Rgb color) {
  draw_line(img, r.left, r.top, r.right, r.top, color);
  draw_line(img, r.left, r.bottom, r.right, r.bottom, color);
  draw_line(img, r.left, r.top, r.left, r.bottom, color);
  draw_line(img, r.right, r.top, r.right, r.bottom, color);
}

inline ImageBuffer binary_to_image(const BinaryMask& m) {
  ImageBuffer out(m.width(), m.height(), 1);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) out.at(x, y) = m.at(x, y) ? 255.0f : 0.0f;
  return out;
}

}  // namespace facade
