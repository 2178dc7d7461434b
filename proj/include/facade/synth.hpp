#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/image.hpp"
#include "facade/raster.hpp"

namespace facade {

// Mask indices used by the generator (dense facade palette order).
namespace cls {
inline constexpr int kBuilding = 0;
inline constexpr int kWindow = 1;
inline constexpr int kRoof = 3;
inline constexpr int kSky = 5;
inline constexpr int kCount = 9;
}  // namespace cls

struct FacadeSpec {
  int width = 320;
  int height = 256;
  int rows = 3;
  int cols = 4;
  int window_width = 40;
  int window_height = 48;
  int margin_left = 24;
  int margin_top = 40;
  int spacing_x = 32;
  int spacing_y = 24;
  int frame = 2;
  int sky_height = 14;
  int roof_height = 10;
  double wall = 190.0;
  double frame_intensity = 45.0;
  double glass = 75.0;
  double sky = 230.0;
  double roof = 120.0;
  double noise_sigma = 6.0;
  double shear = 0.0;  // horizontal window shear, pixels per row

  void validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("facade spec: " + m); };
    if (width < 16 || height < 16) fail("image too small");
    if (rows < 1 || cols < 1) fail("grid must have at least one window");
    if (window_width < 8 || window_height < 8) fail("window smaller than 8x8");
    if (frame < 0 || 2 * frame >= std::min(window_width, window_height)) fail("frame too thick");
    if (margin_left < 0 || margin_top < 0 || spacing_x < 0 || spacing_y < 0 || sky_height < 0 ||
        roof_height < 0)
      fail("negative layout value");
    if (sky_height + roof_height > margin_top) fail("sky and roof bands overlap the windows");
    const double max_shift = std::abs(shear) * (window_height - 1);
    const double right_shift = shear > 0.0 ? max_shift : 0.0;
    const double left_shift = shear < 0.0 ? max_shift : 0.0;
    if (margin_left < left_shift ||
        margin_left + cols * window_width + (cols - 1) * spacing_x + right_shift > width)
      fail("window grid overflows image width");
    if (margin_top + rows * window_height + (rows - 1) * spacing_y > height)
      fail("window grid overflows image height");
    for (double v : {wall, frame_intensity, glass, sky, roof})
      if (!(v >= 0.0 && v <= 255.0)) fail("intensity outside [0, 255]");
    if (!(noise_sigma >= 0.0)) fail("negative noise sigma");
  }

  // Window bounds (before shear) in row-major grid order.
  std::vector<PixelRect> window_rects() const {
    std::vector<PixelRect> out;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const int top = margin_top + r * (window_height + spacing_y);
        const int left = margin_left + c * (window_width + spacing_x);
        out.push_back({top, top + window_height - 1, left, left + window_width - 1});
      }
    return out;
  }
};

struct CorruptionParams {
  int jitter_amplitude = 3;
  double dropout = 0.05;  // approximate fraction of window pixels dropped
  int blob_count = 2;
  int blob_radius = 3;
  int run_min = 6;  // jitter is piecewise constant over runs of this many pixels..
  int run_max = 14;  // ..up to this many
  int window_class = cls::kWindow;
  int building_class = cls::kBuilding;
  std::uint64_t seed = 0;

  void validate() const {
    if (jitter_amplitude < 0) throw std::invalid_argument("corruption: negative amplitude");
    if (!(dropout >= 0.0 && dropout < 1.0))
      throw std::invalid_argument("corruption: dropout must be in [0, 1)");
    if (blob_count < 0 || blob_radius < 0) throw std::invalid_argument("corruption: negative blob setting");
    if (run_min < 1 || run_max < run_min) throw std::invalid_argument("corruption: bad run lengths");
  }
};

// Stage-separated seeds so noise and corruption stay independently reproducible.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stage + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace synth_stage {
inline constexpr std::uint64_t kNoise = 1;
inline constexpr std::uint64_t kJitter = 2;
inline constexpr std::uint64_t kDropout = 3;
inline constexpr std::uint64_t kBlobs = 4;
}  // namespace synth_stage

struct Facade {
  ImageBuffer image;
  LabelMask mask;
};

inline Facade generate(const FacadeSpec& spec, std::uint64_t seed) {
  spec.validate();
  Facade f{ImageBuffer(spec.width, spec.height, 3), LabelMask(spec.width, spec.height, cls::kCount)};
  std::vector<double> base(static_cast<std::size_t>(spec.width) * spec.height, spec.wall);
  auto at = [&](int x, int y) -> double& { return base[static_cast<std::size_t>(y) * spec.width + x]; };

  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      if (y < spec.sky_height) {
        at(x, y) = spec.sky;
        f.mask.at(x, y) = cls::kSky;
      } else if (y < spec.sky_height + spec.roof_height) {
        at(x, y) = spec.roof;
        f.mask.at(x, y) = cls::kRoof;
      } else {
        f.mask.at(x, y) = cls::kBuilding;
      }
    }

  for (const PixelRect& w : spec.window_rects())
    for (int y = w.top; y <= w.bottom; ++y) {
      const int shift = static_cast<int>(std::lround(spec.shear * (y - w.top)));
      for (int x = w.left; x <= w.right; ++x) {
        const bool in_frame = y - w.top < spec.frame || w.bottom - y < spec.frame ||
                              x - w.left < spec.frame || w.right - x < spec.frame;
        at(x + shift, y) = in_frame ? spec.frame_intensity : spec.glass;
        f.mask.at(x + shift, y) = cls::kWindow;
      }
    }

  std::mt19937_64 rng(split_seed(seed, synth_stage::kNoise));
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const double v = at(x, y) + (spec.noise_sigma > 0.0 ? noise(rng) : 0.0);
      // Slight warm tint keeps the image RGB without changing its luminance much.
      const double tint[3] = {6.0, 0.0, -6.0};
      for (int c = 0; c < 3; ++c)
        f.image.at(x, y, c) = static_cast<float>(std::clamp(v + tint[c], 0.0, 255.0));
    }
  return f;
}

namespace synth_detail {

// Piecewise-constant displacement profile of length n.
inline std::vector<int> jitter_profile(int n, const CorruptionParams& p, std::mt19937_64& rng) {
  std::vector<int> out(n, 0);
  if (p.jitter_amplitude == 0) return out;
  std::uniform_int_distribution<int> run(p.run_min, p.run_max);
  std::uniform_int_distribution<int> off(-p.jitter_amplitude, p.jitter_amplitude);
  for (int i = 0; i < n;) {
    const int len = run(rng), v = off(rng);
    for (int k = 0; k < len && i < n; ++k, ++i) out[i] = v;
  }
  return out;
}

}  // namespace synth_detail

// Emulates a segmentation model's preliminary prediction: window outlines are
// jittered, window interiors get holes, and stray window blobs appear on the wall.
inline LabelMask corrupt(const LabelMask& gt, const CorruptionParams& params) {
  params.validate();
  if (params.window_class >= gt.classes() || params.building_class >= gt.classes())
    throw std::invalid_argument("corruption: class index outside mask range");
  LabelMask out = gt;
  const int W = gt.width(), H = gt.height(), A = params.jitter_amplitude;
  const auto comps = connected_components(BinaryMask::from_class(gt, params.window_class));

  std::mt19937_64 jrng(split_seed(params.seed, synth_stage::kJitter));
  for (const auto& cc : comps) {
    const PixelRect b = cc.bounding_rect;
    const int nr = b.height(), nc = b.width();
    // Row extents and column extents of the component.
    std::vector<int> rmin(nr, b.right + 1), rmax(nr, b.left - 1), cmin(nc, b.bottom + 1),
        cmax(nc, b.top - 1);
    for (const Point& p : cc.pixels) {
      rmin[p.y - b.top] = std::min(rmin[p.y - b.top], p.x);
      rmax[p.y - b.top] = std::max(rmax[p.y - b.top], p.x);
      cmin[p.x - b.left] = std::min(cmin[p.x - b.left], p.y);
      cmax[p.x - b.left] = std::max(cmax[p.x - b.left], p.y);
    }
    const auto jl = synth_detail::jitter_profile(nr, params, jrng);
    const auto jr = synth_detail::jitter_profile(nr, params, jrng);
    const auto jt = synth_detail::jitter_profile(nc, params, jrng);
    const auto jb = synth_detail::jitter_profile(nc, params, jrng);

    // Pixel is window iff inside both its (displaced) row and column extent;
    // rows/columns beyond the component borrow the nearest undisplaced extent.
    auto inside = [&](int x, int y) {
      const int ri = std::clamp(y - b.top, 0, nr - 1);
      const int ci = std::clamp(x - b.left, 0, nc - 1);
      const bool row_in = y >= b.top && y <= b.bottom;
      const bool col_in = x >= b.left && x <= b.right;
      const int lo_x = rmin[ri] - (row_in ? jl[ri] : 0);
      const int hi_x = rmax[ri] + (row_in ? jr[ri] : 0);
      const int lo_y = cmin[ci] - (col_in ? jt[ci] : 0);
      const int hi_y = cmax[ci] + (col_in ? jb[ci] : 0);
      return x >= lo_x && x <= hi_x && y >= lo_y && y <= hi_y;
    };
    for (int y = std::max(0, b.top - A); y <= std::min(H - 1, b.bottom + A); ++y)
      for (int x = std::max(0, b.left - A); x <= std::min(W - 1, b.right + A); ++x) {
        const bool was = gt.at(x, y) == params.window_class;
        const bool member = b.contains(x, y) && was;
        const bool now = inside(x, y);
        if (now && !was) out.at(x, y) = static_cast<std::uint8_t>(params.window_class);
        if (!now && member) out.at(x, y) = static_cast<std::uint8_t>(params.building_class);
      }
  }

  if (params.dropout > 0.0) {
    std::mt19937_64 drng(split_seed(params.seed, synth_stage::kDropout));
    std::bernoulli_distribution hole(params.dropout / 9.0);
    for (const auto& cc : comps)
      for (const Point& p : cc.pixels) {
        if (!hole(drng)) continue;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int x = p.x + dx, y = p.y + dy;
            if (x >= 0 && y >= 0 && x < W && y < H && gt.at(x, y) == params.window_class &&
                out.at(x, y) == params.window_class)
              out.at(x, y) = static_cast<std::uint8_t>(params.building_class);
          }
      }
  }

  if (params.blob_count > 0) {
    std::mt19937_64 brng(split_seed(params.seed, synth_stage::kBlobs));
    const int r = params.blob_radius;
    const int clearance = A + r + 2;
    std::uniform_int_distribution<int> ux(r, std::max(r, W - 1 - r));
    std::uniform_int_distribution<int> uy(r, std::max(r, H - 1 - r));
    auto clear_of_windows = [&](int cx, int cy) {
      for (const auto& cc : comps) {
        const PixelRect b = cc.bounding_rect;
        const int dx = std::max({b.left - cx, 0, cx - b.right});
        const int dy = std::max({b.top - cy, 0, cy - b.bottom});
        if (std::max(dx, dy) < clearance) return false;
      }
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
          if (gt.at(x, y) != params.building_class) return false;
      return true;
    };
    for (int n = 0; n < params.blob_count; ++n) {
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const int cx = ux(brng), cy = uy(brng);
        if (cx - r < 0 || cy - r < 0 || cx + r >= W || cy + r >= H) continue;
        if (!clear_of_windows(cx, cy)) continue;
        for (int y = cy - r; y <= cy + r; ++y)
          for (int x = cx - r; x <= cx + r; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
              out.at(x, y) = static_cast<std::uint8_t>(params.window_class);
        break;
      }
    }
  }
  return out;
}

// Image, ground truth and corrupted prediction for one seed.
struct Fixture {
  ImageBuffer image;
  LabelMask gt;
  LabelMask pred;
};

inline Fixture make_fixture(const FacadeSpec& spec, CorruptionParams corruption, std::uint64_t seed) {
  auto f = generate(spec, seed);
  corruption.seed = seed;
  auto pred = corrupt(f.mask, corruption);
  return {std::move(f.image), std::move(f.mask), std::move(pred)};
}

inline nlohmann::ordered_json to_json(const FacadeSpec& s) {
  return {{"width", s.width},
          {"height", s.height},
          {"rows", s.rows},
          {"cols", s.cols},
          {"window_width", s.window_width},
          {"window_height", s.window_height},
          {"margin_left", s.margin_left},
          {"margin_top", s.margin_top},
          {"spacing_x", s.spacing_x},
          {"spacing_y", s.spacing_y},
          {"frame", s.frame},
          {"sky_height", s.sky_height},
          {"roof_height", s.roof_height},
          {"wall", s.wall},
          {"frame_intensity", s.frame_intensity},
          {"glass", s.glass},
          {"sky", s.sky},
          {"roof", s.roof},
          {"noise_sigma", s.noise_sigma},
          {"shear", s.shear}};
}

inline nlohmann::ordered_json to_json(const CorruptionParams& c) {
  return {{"jitter_amplitude", c.jitter_amplitude},
          {"dropout", c.dropout},
          {"blob_count", c.blob_count},
          {"blob_radius", c.blob_radius},
          {"run_min", c.run_min},
          {"run_max", c.run_max},
          {"window_class", c.window_class},
          {"building_class", c.building_class}};
}

}  // namespace facade
