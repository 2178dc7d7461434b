#pragma once

// Line segment detector: level-line region growing, rectangular
// approximation and a-contrario validation by the number of false alarms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "facade/image.hpp"

namespace facade {

struct LineSegment {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double length() const { return std::hypot(x2 - x1, y2 - y1); }

  // Undirected direction in (-pi/2, pi/2].
  double angle() const {
    double a = std::atan2(y2 - y1, x2 - x1);
    if (a <= -std::numbers::pi / 2) a += std::numbers::pi;
    if (a > std::numbers::pi / 2) a -= std::numbers::pi;
    return a;
  }

  double mid_x() const { return 0.5 * (x1 + x2); }
  double mid_y() const { return 0.5 * (y1 + y2); }

  bool operator==(const LineSegment&) const = default;
};

struct LsdParams {
  double angle_tolerance = 22.5 * std::numbers::pi / 180.0;  // tau, radians
  // rho: gradient quantization bound 2 / sin(tau) on the 0..255 scale.
  double gradient_threshold = 2.0 / std::sin(22.5 * std::numbers::pi / 180.0);
  double nfa_epsilon = 1.0;
  double scale = 0.8;
  double sigma_scale = 0.6;
  double density_threshold = 0.7;
  int n_bins = 1024;

  // Sets tau and re-derives rho from it.
  LsdParams& set_angle_tolerance(double tau) {
    angle_tolerance = tau;
    gradient_threshold = 2.0 / std::sin(tau);
    return *this;
  }

  void validate() const {
    if (!(angle_tolerance > 0.0 && angle_tolerance < std::numbers::pi / 2))
      throw std::invalid_argument("lsd: angle tolerance must be in (0, pi/2)");
    if (!(nfa_epsilon > 0.0)) throw std::invalid_argument("lsd: epsilon must be positive");
    if (!(scale > 0.0 && scale <= 1.0)) throw std::invalid_argument("lsd: scale must be in (0, 1]");
    if (!(gradient_threshold >= 0.0)) throw std::invalid_argument("lsd: negative gradient threshold");
    if (!(sigma_scale > 0.0)) throw std::invalid_argument("lsd: sigma_scale must be positive");
    if (!(density_threshold > 0.0 && density_threshold <= 1.0))
      throw std::invalid_argument("lsd: density threshold must be in (0, 1]");
    if (n_bins < 1) throw std::invalid_argument("lsd: n_bins must be >= 1");
  }
};

// Gradient on pixel corners from a 2x2 mask. Pixel (x, y) holds the gradient
// at (x + 0.5, y + 0.5); the last row and column are never valid.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> magnitude;
  std::vector<double> level_line_angle;  // gradient angle + pi/2, in (-pi, pi]
  std::vector<std::uint8_t> valid;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

  double gradient_angle(int x, int y) const {
    double a = level_line_angle[index(x, y)] - std::numbers::pi / 2;
    if (a <= -std::numbers::pi) a += 2 * std::numbers::pi;
    return a;
  }
};

// A validated segment plus the rectangle statistics that validated it.
struct DetectedLine {
  LineSegment segment;
  double width = 0.0;      // rectangle width, input pixels
  double precision = 0.0;  // p: probability of a random aligned point
  double log_nfa = 0.0;    // -log10(NFA)
};

namespace lsd_detail {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

inline Plane from_image(const ImageBuffer& img) {
  Plane p{img.width(), img.height(), {}};
  p.v.assign(img.data().begin(), img.data().end());
  return p;
}

inline std::vector<double> sampled_gaussian(double sigma, double mean, int n) {
  std::vector<double> k(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = (i - mean) / sigma;
    k[i] = std::exp(-0.5 * d * d);
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Anti-aliased downsampling: Gaussian of sigma = sigma_scale / scale centred on
// each output sample x / scale, symmetric boundary.
inline Plane gaussian_sampler(const Plane& in, double scale, double sigma_scale) {
  const int nw = static_cast<int>(std::ceil(in.w * scale));
  const int nh = static_cast<int>(std::ceil(in.h * scale));
  const double sigma = scale < 1.0 ? sigma_scale / scale : sigma_scale;
  const double prec = 2.0;
  const int hk = static_cast<int>(std::ceil(sigma * std::sqrt(2.0 * prec * std::log(10.0))));
  const int n = 1 + 2 * hk;

  auto reflect = [](int j, int size) {
    const int dbl = 2 * size;
    while (j < 0) j += dbl;
    while (j >= dbl) j -= dbl;
    if (j >= size) j = dbl - 1 - j;
    return j;
  };

  // Per output coordinate: kernel weights and source indices.
  auto taps = [&](int out_size, int in_size) {
    std::vector<std::vector<std::pair<int, double>>> t(out_size);
    for (int x = 0; x < out_size; ++x) {
      const double xx = x / scale;
      const int xc = static_cast<int>(std::floor(xx + 0.5));
      const auto k = sampled_gaussian(sigma, hk + xx - xc, n);
      for (int i = 0; i < n; ++i) t[x].emplace_back(reflect(xc - hk + i, in_size), k[i]);
    }
    return t;
  };

  const auto tx = taps(nw, in.w);
  Plane aux{nw, in.h, std::vector<double>(static_cast<std::size_t>(nw) * in.h)};
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < nw; ++x) {
      double s = 0.0;
      for (auto [j, wgt] : tx[x]) s += in.at(j, y) * wgt;
      aux.at(x, y) = s;
    }

  const auto ty = taps(nh, in.h);
  Plane out{nw, nh, std::vector<double>(static_cast<std::size_t>(nw) * nh)};
  for (int y = 0; y < nh; ++y)
    for (int x = 0; x < nw; ++x) {
      double s = 0.0;
      for (auto [j, wgt] : ty[y]) s += aux.at(x, j) * wgt;
      out.at(x, y) = s;
    }
  return out;
}

inline GradientField gradient(const Plane& in, double threshold) {
  GradientField g;
  g.width = in.w;
  g.height = in.h;
  const std::size_t n = static_cast<std::size_t>(in.w) * in.h;
  g.magnitude.assign(n, 0.0);
  g.level_line_angle.assign(n, 0.0);
  g.valid.assign(n, 0);
  for (int y = 0; y + 1 < in.h; ++y)
    for (int x = 0; x + 1 < in.w; ++x) {
      const double com1 = in.at(x + 1, y + 1) - in.at(x, y);
      const double com2 = in.at(x + 1, y) - in.at(x, y + 1);
      const double gx = com1 + com2;
      const double gy = com1 - com2;
      const double norm = std::sqrt((gx * gx + gy * gy) / 4.0);
      const std::size_t i = g.index(x, y);
      g.magnitude[i] = norm;
      if (norm > threshold) {
        g.valid[i] = 1;
        g.level_line_angle[i] = std::atan2(gx, -gy);
      }
    }
  return g;
}

inline double angle_diff(double a, double b) {
  a -= b;
  while (a <= -std::numbers::pi) a += 2 * std::numbers::pi;
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  return std::abs(a);
}

inline double angle_diff_signed(double a, double b) {
  a -= b;
  while (a <= -std::numbers::pi) a += 2 * std::numbers::pi;
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  return a;
}

inline bool is_aligned(const GradientField& g, std::size_t i, double theta, double prec) {
  if (!g.valid[i]) return false;
  double d = std::abs(theta - g.level_line_angle[i]);
  if (d > 1.5 * std::numbers::pi) d = std::abs(d - 2 * std::numbers::pi);
  return d <= prec;
}

// -log10 of the binomial tail NFA = NT * sum_{i>=k} C(n,i) p^i (1-p)^(n-i).
inline double log_nfa(int n, int k, double p, double log_nt) {
  if (n < 0 || k < 0 || k > n || p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("lsd: invalid NFA arguments");
  if (n == 0 || k == 0) return -log_nt;
  if (n == k) return -log_nt - n * std::log10(p);
  const double tolerance = 0.1;
  const double p_term = p / (1.0 - p);
  const double log1term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                          k * std::log(p) + (n - k) * std::log(1.0 - p);
  double term = std::exp(log1term);
  if (term == 0.0) {
    if (k > n * p) return -log1term / std::numbers::ln10 - log_nt;
    return -log_nt;
  }
  double tail = term;
  for (int i = k + 1; i <= n; ++i) {
    const double bin_term = static_cast<double>(n - i + 1) / i;
    const double mult_term = bin_term * p_term;
    term *= mult_term;
    tail += term;
    if (bin_term < 1.0) {
      const double err =
          term * ((1.0 - std::pow(mult_term, n - i + 1)) / (1.0 - mult_term) - 1.0);
      if (err < tolerance * std::abs(-std::log10(tail) - log_nt) * tail) break;
    }
  }
  return -std::log10(tail) - log_nt;
}

struct Rectangle {
  double x1, y1, x2, y2;  // centerline endpoints
  double width;
  double x, y;            // center of mass
  double theta;
  double dx, dy;          // unit direction
  double prec;            // tolerance angle
  double p;               // prec / pi
};

// Calls f(x, y) for every in-image pixel whose center lies inside the rectangle.
template <typename F>
void for_each_pixel(const Rectangle& r, int w, int h, F&& f) {
  const double len = std::hypot(r.x2 - r.x1, r.y2 - r.y1);
  const double hw = r.width / 2.0;
  const double nx = -r.dy, ny = r.dx;
  const double vx[4] = {r.x1 + nx * hw, r.x2 + nx * hw, r.x2 - nx * hw, r.x1 - nx * hw};
  const double vy[4] = {r.y1 + ny * hw, r.y2 + ny * hw, r.y2 - ny * hw, r.y1 - ny * hw};
  const double ymin = *std::min_element(vy, vy + 4), ymax = *std::max_element(vy, vy + 4);
  const double xmin = *std::min_element(vx, vx + 4), xmax = *std::max_element(vx, vx + 4);
  constexpr double eps = 1e-9;

  // Intersects lo <= a*x + b <= hi into [xlo, xhi].
  auto clip = [](double a, double b, double lo, double hi, double& xlo, double& xhi) {
    if (std::abs(a) < 1e-12) {
      if (b < lo - eps || b > hi + eps) xhi = xlo - 1.0;
      return;
    }
    double t0 = (lo - b) / a, t1 = (hi - b) / a;
    if (t0 > t1) std::swap(t0, t1);
    xlo = std::max(xlo, t0);
    xhi = std::min(xhi, t1);
  };

  const int y0 = std::max(0, static_cast<int>(std::ceil(ymin - eps)));
  const int y1 = std::min(h - 1, static_cast<int>(std::floor(ymax + eps)));
  for (int y = y0; y <= y1; ++y) {
    double xlo = xmin - 1.0, xhi = xmax + 1.0;
    const double ry = y - r.y1;
    clip(r.dx, ry * r.dy - r.x1 * r.dx, 0.0, len, xlo, xhi);
    clip(-r.dy, ry * r.dx + r.x1 * r.dy, -hw, hw, xlo, xhi);
    if (xhi < xlo) continue;
    const int xa = std::max(0, static_cast<int>(std::ceil(xlo - eps)));
    const int xb = std::min(w - 1, static_cast<int>(std::floor(xhi + eps)));
    for (int x = xa; x <= xb; ++x) f(x, y);
  }
}

inline double rect_nfa(const Rectangle& r, const GradientField& g, double log_nt) {
  int pts = 0, alg = 0;
  for_each_pixel(r, g.width, g.height, [&](int x, int y) {
    ++pts;
    if (is_aligned(g, g.index(x, y), r.theta, r.prec)) ++alg;
  });
  return log_nfa(pts, alg, r.p, log_nt);
}

class Detector {
 public:
  Detector(const GradientField& g, const LsdParams& params)
      : g_(g), params_(params), used_(g.magnitude.size(), 0) {
    prec_ = params.angle_tolerance;
    p_ = params.angle_tolerance / std::numbers::pi;
    log_nt_ = 5.0 * (std::log10(static_cast<double>(g.width)) +
                     std::log10(static_cast<double>(g.height))) / 2.0 +
              std::log10(11.0);
    min_reg_size_ = static_cast<int>(-log_nt_ / std::log10(p_));
    log_eps_ = -std::log10(params.nfa_epsilon);
  }

  // Output rectangles are in the detector's own (possibly scaled) pixel frame.
  std::vector<std::pair<Rectangle, double>> run() {
    std::vector<std::pair<Rectangle, double>> out;
    for (std::size_t seed : ordered_seeds()) {
      if (used_[seed] || !g_.valid[seed]) continue;
      const int sx = static_cast<int>(seed % g_.width), sy = static_cast<int>(seed / g_.width);
      double reg_angle = 0.0;
      region_grow(sx, sy, reg_angle, prec_);
      if (static_cast<int>(reg_.size()) < min_reg_size_) continue;
      Rectangle rec = region2rect(reg_angle, prec_, p_);
      if (!refine(reg_angle, rec)) continue;
      const double lnfa = rect_improve(rec);
      if (lnfa <= log_eps_) continue;
      out.emplace_back(rec, lnfa);
    }
    return out;
  }

 private:
  // Valid pixels, descending by quantized gradient magnitude, row-major within a bin.
  std::vector<std::size_t> ordered_seeds() const {
    double max_grad = 0.0;
    for (std::size_t i = 0; i < g_.magnitude.size(); ++i)
      if (g_.valid[i]) max_grad = std::max(max_grad, g_.magnitude[i]);
    std::vector<std::size_t> order;
    if (max_grad <= 0.0) return order;
    const int nb = params_.n_bins;
    std::vector<int> bin(g_.magnitude.size(), -1);
    std::vector<std::size_t> counts(nb, 0);
    for (std::size_t i = 0; i < g_.magnitude.size(); ++i) {
      if (!g_.valid[i]) continue;
      int b = static_cast<int>(g_.magnitude[i] * nb / max_grad);
      if (b >= nb) b = nb - 1;
      bin[i] = b;
      ++counts[b];
    }
    std::vector<std::size_t> start(nb, 0);
    std::size_t acc = 0;
    for (int b = nb - 1; b >= 0; --b) {
      start[b] = acc;
      acc += counts[b];
    }
    order.resize(acc);
    for (std::size_t i = 0; i < g_.magnitude.size(); ++i)
      if (bin[i] >= 0) order[start[bin[i]]++] = i;
    return order;
  }

  void region_grow(int x, int y, double& reg_angle, double prec) {
    reg_.clear();
    const std::size_t i0 = g_.index(x, y);
    reg_.push_back({x, y});
    reg_angle = g_.level_line_angle[i0];
    double sumdx = std::cos(reg_angle), sumdy = std::sin(reg_angle);
    used_[i0] = 1;
    for (std::size_t i = 0; i < reg_.size(); ++i) {
      const auto [px, py] = reg_[i];
      for (int yy = py - 1; yy <= py + 1; ++yy)
        for (int xx = px - 1; xx <= px + 1; ++xx) {
          if (xx < 0 || yy < 0 || xx >= g_.width || yy >= g_.height) continue;
          const std::size_t j = g_.index(xx, yy);
          if (used_[j] || !is_aligned(g_, j, reg_angle, prec)) continue;
          used_[j] = 1;
          reg_.push_back({xx, yy});
          sumdx += std::cos(g_.level_line_angle[j]);
          sumdy += std::sin(g_.level_line_angle[j]);
          reg_angle = std::atan2(sumdy, sumdx);
        }
    }
  }

  double region_theta(double cx, double cy, double reg_angle, double prec) const {
    double ixx = 0.0, iyy = 0.0, ixy = 0.0;
    for (const auto& [px, py] : reg_) {
      const double wgt = g_.magnitude[g_.index(px, py)];
      ixx += (py - cy) * (py - cy) * wgt;
      iyy += (px - cx) * (px - cx) * wgt;
      ixy -= (px - cx) * (py - cy) * wgt;
    }
    const double lambda =
        0.5 * (ixx + iyy - std::sqrt((ixx - iyy) * (ixx - iyy) + 4.0 * ixy * ixy));
    double theta = std::abs(ixx) > std::abs(iyy) ? std::atan2(lambda - ixx, ixy)
                                                 : std::atan2(ixy, lambda - iyy);
    if (angle_diff(theta, reg_angle) > prec) theta += std::numbers::pi;
    return theta;
  }

  Rectangle region2rect(double reg_angle, double prec, double p) const {
    double x = 0.0, y = 0.0, sum = 0.0;
    for (const auto& [px, py] : reg_) {
      const double wgt = g_.magnitude[g_.index(px, py)];
      x += px * wgt;
      y += py * wgt;
      sum += wgt;
    }
    x /= sum;
    y /= sum;
    const double theta = region_theta(x, y, reg_angle, prec);
    const double dx = std::cos(theta), dy = std::sin(theta);
    double l_min = 0.0, l_max = 0.0, w_min = 0.0, w_max = 0.0;
    for (const auto& [px, py] : reg_) {
      const double l = (px - x) * dx + (py - y) * dy;
      const double wv = -(px - x) * dy + (py - y) * dx;
      l_min = std::min(l_min, l);
      l_max = std::max(l_max, l);
      w_min = std::min(w_min, wv);
      w_max = std::max(w_max, wv);
    }
    Rectangle r{};
    r.x1 = x + l_min * dx;
    r.y1 = y + l_min * dy;
    r.x2 = x + l_max * dx;
    r.y2 = y + l_max * dy;
    r.width = std::max(1.0, w_max - w_min);
    r.x = x;
    r.y = y;
    r.theta = theta;
    r.dx = dx;
    r.dy = dy;
    r.prec = prec;
    r.p = p;
    return r;
  }

  double density(const Rectangle& r) const {
    return static_cast<double>(reg_.size()) /
           (std::hypot(r.x2 - r.x1, r.y2 - r.y1) * r.width);
  }

  bool refine(double reg_angle, Rectangle& rec) {
    if (density(rec) >= params_.density_threshold) return true;

    const auto [sx, sy] = reg_.front();
    const double ang_c = g_.level_line_angle[g_.index(sx, sy)];
    double sum = 0.0, s_sum = 0.0;
    int n = 0;
    for (const auto& [px, py] : reg_) {
      used_[g_.index(px, py)] = 0;
      if (std::hypot(sx - px, sy - py) < rec.width) {
        const double d = angle_diff_signed(g_.level_line_angle[g_.index(px, py)], ang_c);
        sum += d;
        s_sum += d * d;
        ++n;
      }
    }
    const double mean = sum / n;
    const double tau = 2.0 * std::sqrt((s_sum - 2.0 * mean * sum) / n + mean * mean);

    region_grow(sx, sy, reg_angle, tau);
    if (reg_.size() < 2) return false;
    rec = region2rect(reg_angle, prec_, p_);
    if (density(rec) >= params_.density_threshold) return true;
    return reduce_region_radius(reg_angle, rec);
  }

  bool reduce_region_radius(double reg_angle, Rectangle& rec) {
    const auto [sx, sy] = reg_.front();
    double rad = std::max(std::hypot(sx - rec.x1, sy - rec.y1), std::hypot(sx - rec.x2, sy - rec.y2));
    while (density(rec) < params_.density_threshold) {
      rad *= 0.75;
      for (std::size_t i = 0; i < reg_.size();) {
        if (std::hypot(sx - reg_[i].x, sy - reg_[i].y) > rad) {
          used_[g_.index(reg_[i].x, reg_[i].y)] = 0;
          reg_[i] = reg_.back();
          reg_.pop_back();
        } else {
          ++i;
        }
      }
      if (reg_.size() < 2) return false;
      rec = region2rect(reg_angle, prec_, p_);
    }
    return true;
  }

  // Greedy search over precision and width for the most significant rectangle.
  // Early exits compare against a fixed reference (NFA = 1) rather than the
  // caller's epsilon, so the final rectangle does not depend on epsilon.
  double rect_improve(Rectangle& rec) const {
    constexpr double kRefLogEps = 0.0;
    const double delta = 0.5, delta_2 = delta / 2.0;
    double lnfa = rect_nfa(rec, g_, log_nt_);
    if (lnfa > kRefLogEps) return lnfa;

    auto try_steps = [&](auto&& step) {
      Rectangle r = rec;
      for (int n = 0; n < 5; ++n) {
        if (!step(r)) continue;
        const double v = rect_nfa(r, g_, log_nt_);
        if (v > lnfa) {
          lnfa = v;
          rec = r;
        }
      }
    };
    auto finer = [](Rectangle& r) {
      r.p /= 2.0;
      r.prec = r.p * std::numbers::pi;
      return true;
    };

    try_steps(finer);
    if (lnfa > kRefLogEps) return lnfa;
    try_steps([&](Rectangle& r) {
      if (r.width - delta < 0.5) return false;
      r.width -= delta;
      return true;
    });
    if (lnfa > kRefLogEps) return lnfa;
    try_steps([&](Rectangle& r) {
      if (r.width - delta < 0.5) return false;
      r.x1 += -r.dy * delta_2;
      r.y1 += r.dx * delta_2;
      r.x2 += -r.dy * delta_2;
      r.y2 += r.dx * delta_2;
      r.width -= delta;
      return true;
    });
    if (lnfa > kRefLogEps) return lnfa;
    try_steps([&](Rectangle& r) {
      if (r.width - delta < 0.5) return false;
      r.x1 -= -r.dy * delta_2;
      r.y1 -= r.dx * delta_2;
      r.x2 -= -r.dy * delta_2;
      r.y2 -= r.dx * delta_2;
      r.width -= delta;
      return true;
    });
    if (lnfa > kRefLogEps) return lnfa;
    try_steps(finer);
    return lnfa;
  }

  struct Px {
    int x, y;
  };

  const GradientField& g_;
  const LsdParams& params_;
  std::vector<std::uint8_t> used_;
  std::vector<Px> reg_;
  double prec_ = 0.0;
  double p_ = 0.0;
  double log_nt_ = 0.0;
  double log_eps_ = 0.0;
  int min_reg_size_ = 0;
};

// Endpoint order: smaller x first, then smaller y.
inline LineSegment canonical(LineSegment s) {
  if (std::tie(s.x2, s.y2) < std::tie(s.x1, s.y1)) {
    std::swap(s.x1, s.x2);
    std::swap(s.y1, s.y2);
  }
  return s;
}

}  // namespace lsd_detail

inline GradientField image_gradient(const ImageBuffer& gray, double threshold = LsdParams{}.gradient_threshold) {
  if (gray.channels() != 1) throw std::invalid_argument("image_gradient: expected 1 channel");
  return lsd_detail::gradient(lsd_detail::from_image(gray), threshold);
}

// Segments with their validation statistics, sorted by descending length and
// then lexicographic endpoints.
inline std::vector<DetectedLine> detect_lines_detailed(const ImageBuffer& gray,
                                                       const LsdParams& params = {}) {
  params.validate();
  if (gray.channels() != 1) throw std::invalid_argument("detect_lines: expected 1 channel");
  if (gray.width() < 16 || gray.height() < 16)
    throw std::invalid_argument("detect_lines: image smaller than 16x16");

  auto plane = lsd_detail::from_image(gray);
  if (params.scale != 1.0) plane = lsd_detail::gaussian_sampler(plane, params.scale, params.sigma_scale);
  const GradientField g = lsd_detail::gradient(plane, params.gradient_threshold);

  lsd_detail::Detector det(g, params);
  std::vector<DetectedLine> out;
  for (auto& [rec, lnfa] : det.run()) {
    // Gradients live at pixel corners: shift by half a pixel, then undo scaling.
    LineSegment s{(rec.x1 + 0.5) / params.scale, (rec.y1 + 0.5) / params.scale,
                  (rec.x2 + 0.5) / params.scale, (rec.y2 + 0.5) / params.scale};
    if (!(s.length() > 0.0)) continue;
    out.push_back({lsd_detail::canonical(s), rec.width / params.scale, rec.p, lnfa});
  }
  std::sort(out.begin(), out.end(), [](const DetectedLine& a, const DetectedLine& b) {
    const double la = a.segment.length(), lb = b.segment.length();
    if (la != lb) return la > lb;
    const auto& s = a.segment;
    const auto& t = b.segment;
    return std::tie(s.x1, s.y1, s.x2, s.y2) < std::tie(t.x1, t.y1, t.x2, t.y2);
  });
  return out;
}

inline std::vector<LineSegment> detect_lines(const ImageBuffer& gray, const LsdParams& params = {}) {
  std::vector<LineSegment> out;
  for (const auto& d : detect_lines_detailed(gray, params)) out.push_back(d.segment);
  return out;
}

}  // namespace facade
