#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace facade {

// Inclusive pixel rectangle (rows top..bottom, cols left..right).
struct PixelRect {
  int top = 0;
  int bottom = -1;
  int left = 0;
  int right = -1;

  int height() const { return bottom - top + 1; }
  int width() const { return right - left + 1; }
  bool contains(int x, int y) const {
    return y >= top && y <= bottom && x >= left && x <= right;
  }
  bool operator==(const PixelRect&) const = default;
};

// Continuous axis-aligned rectangle in pixel-center coordinates
// (pixel (x, y) has its center at (x, y)).
struct Rect {
  double top = 0.0;
  double bottom = 0.0;
  double left = 0.0;
  double right = 0.0;

  bool degenerate() const { return !(top < bottom) || !(left < right); }
  bool operator==(const Rect&) const = default;
};

// Row-major intensity image, 1 or 3 interleaved channels, values in [0, 255].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, float fill = 0.0f)
      : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("image dimensions must be positive");
    if (channels != 1 && channels != 3)
      throw std::invalid_argument("unsupported channel count " + std::to_string(channels));
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// Per-pixel class indices in [0, classes).
class LabelMask {
 public:
  LabelMask() = default;
  LabelMask(int width, int height, int classes, std::uint8_t fill = 0)
      : width_(width), height_(height), classes_(classes) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("mask dimensions must be positive");
    if (classes < 1 || classes > 256)
      throw std::invalid_argument("class count must be in [1, 256]");
    if (fill >= classes) throw std::invalid_argument("fill value out of class range");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int classes() const { return classes_; }
  std::size_t size() const { return data_.size(); }

  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  bool same_shape(const LabelMask& o) const { return width_ == o.width_ && height_ == o.height_; }

  // Throws if any value is >= classes().
  void validate() const {
    for (std::uint8_t v : data_)
      if (v >= classes_)
        throw std::out_of_range("mask value " + std::to_string(v) + " >= class count " +
                                std::to_string(classes_));
  }

  bool operator==(const LabelMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int classes_ = 0;
  std::vector<std::uint8_t> data_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("mask dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
  }

  // Foreground where label == cls.
  static BinaryMask from_class(const LabelMask& mask, int cls) {
    BinaryMask out(mask.width(), mask.height());
    auto src = mask.data();
    for (std::size_t i = 0; i < src.size(); ++i) out.data_[i] = src[i] == cls ? 1 : 0;
    return out;
  }

  int width() const { return width_; }
  int height() const { return height_; }

  bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1));
  }

  std::span<const std::uint8_t> data() const { return data_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace facade
