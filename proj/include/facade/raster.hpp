#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "facade/image.hpp"

namespace facade {

inline ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3)
    throw std::invalid_argument("to_grayscale: unsupported channel count " +
                                std::to_string(img.channels()));
  ImageBuffer out(img.width(), img.height(), 1);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const float r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = 0.299f * r + 0.587f * g + 0.114f * b;
  }
  return out;
}

// Normalized 1-D sampled Gaussian of odd length.
inline std::vector<double> gaussian_kernel_1d(int kernel, double sigma) {
  if (kernel < 1 || kernel % 2 == 0)
    throw std::invalid_argument("gaussian kernel size must be odd and >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  const int h = kernel / 2;
  std::vector<double> k(kernel);
  double sum = 0.0;
  for (int i = 0; i < kernel; ++i) {
    const double d = i - h;
    k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Square Gaussian convolution with edge-replicated borders. The 2-D kernel is
// the outer product of the normalized 1-D kernel, applied as two passes.
inline ImageBuffer gaussian_blur(const ImageBuffer& img, int kernel, double sigma) {
  const auto k = gaussian_kernel_1d(kernel, sigma);
  const int h = kernel / 2;
  const int w = img.width(), ht = img.height(), ch = img.channels();
  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };

  ImageBuffer tmp(w, ht, ch);
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int i = 0; i < kernel; ++i) acc += k[i] * img.at(clampi(x + i - h, 0, w - 1), y, c);
        tmp.at(x, y, c) = static_cast<float>(acc);
      }

  ImageBuffer out(w, ht, ch);
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int i = 0; i < kernel; ++i) acc += k[i] * tmp.at(x, clampi(y + i - h, 0, ht - 1), c);
        out.at(x, y, c) = static_cast<float>(acc);
      }
  return out;
}

namespace detail {

// One pass of a square min (erode) or max (dilate) filter; pixels outside the
// image count as background.
inline BinaryMask square_filter(const BinaryMask& in, int radius, bool erode) {
  const int w = in.width(), h = in.height();
  BinaryMask rows(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool v = erode;
      for (int dx = -radius; dx <= radius; ++dx) {
        const int xx = x + dx;
        const bool s = xx >= 0 && xx < w && in.at(xx, y);
        if (erode ? !s : s) {
          v = !erode;
          break;
        }
      }
      rows.set(x, y, v);
    }
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool v = erode;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        const bool s = yy >= 0 && yy < h && rows.at(x, yy);
        if (erode ? !s : s) {
          v = !erode;
          break;
        }
      }
      out.set(x, y, v);
    }
  return out;
}

inline void check_morph_args(int radius, int iterations) {
  if (radius < 1) throw std::invalid_argument("morphology radius must be >= 1");
  if (iterations < 1) throw std::invalid_argument("morphology iterations must be >= 1");
}

}  // namespace detail

// Erosion with a (2r+1)x(2r+1) square element, repeated `iterations` times.
inline BinaryMask erode(const BinaryMask& mask, int radius = 1, int iterations = 1) {
  detail::check_morph_args(radius, iterations);
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = detail::square_filter(m, radius, true);
  return m;
}

inline BinaryMask dilate(const BinaryMask& mask, int radius = 1, int iterations = 1) {
  detail::check_morph_args(radius, iterations);
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = detail::square_filter(m, radius, false);
  return m;
}

inline BinaryMask open(const BinaryMask& mask, int radius = 1, int iterations = 1) {
  return dilate(erode(mask, radius, iterations), radius, iterations);
}

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct ConnectedComponent {
  int id = 0;
  std::size_t pixel_count = 0;
  PixelRect bounding_rect;
  std::vector<Point> pixels;
};

enum class Connectivity { Four = 4, Eight = 8 };

// Labels foreground pixels. Components are numbered in row-major order of
// their first pixel; member pixels are listed in BFS order from that pixel.
inline std::vector<ConnectedComponent> connected_components(
    const BinaryMask& mask, Connectivity conn = Connectivity::Four) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<ConnectedComponent> comps;
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int nbrs = conn == Connectivity::Four ? 4 : 8;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      ConnectedComponent cc;
      cc.id = static_cast<int>(comps.size());
      cc.bounding_rect = {y, y, x, x};
      label[static_cast<std::size_t>(y) * w + x] = cc.id;
      cc.pixels.push_back({x, y});
      for (std::size_t head = 0; head < cc.pixels.size(); ++head) {
        const Point p = cc.pixels[head];
        auto& r = cc.bounding_rect;
        r.top = std::min(r.top, p.y);
        r.bottom = std::max(r.bottom, p.y);
        r.left = std::min(r.left, p.x);
        r.right = std::max(r.right, p.x);
        for (int k = 0; k < nbrs; ++k) {
          const int nx = p.x + kDx[k], ny = p.y + kDy[k];
          if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny)) continue;
          int& l = label[static_cast<std::size_t>(ny) * w + nx];
          if (l >= 0) continue;
          l = cc.id;
          cc.pixels.push_back({nx, ny});
        }
      }
      cc.pixel_count = cc.pixels.size();
      comps.push_back(std::move(cc));
    }
  return comps;
}

}  // namespace facade
