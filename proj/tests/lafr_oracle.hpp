#pragma once

// Exhaustive reference for segment-to-edge assignment and boundary-ring
// voting, written without calling the library's geometry helpers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "facade/lafr.hpp"

namespace oracle {

struct Candidate {
  int segment;
  double distance;
  double length;
};

// 0 top, 1 bottom, 2 left, 3 right.
inline std::array<std::optional<Candidate>, 4> brute_force_assign(const facade::PixelRect& a,
                                                                  const std::vector<facade::LineSegment>& segs,
                                                                  double delta, double theta,
                                                                  double overlap_ratio) {
  const double inf = std::numeric_limits<double>::infinity();
  std::array<std::vector<Candidate>, 4> pool;
  for (std::size_t j = 0; j < segs.size(); ++j) {
    const auto& s = segs[j];
    const double dx = std::abs(s.x2 - s.x1), dy = std::abs(s.y2 - s.y1);
    const double len = std::sqrt(dx * dx + dy * dy);
    if (!(len > 0)) continue;
    const bool horiz = std::atan2(dy, dx) <= std::atan2(dx, dy);
    const double gap = horiz ? std::atan2(dy, dx) : std::atan2(dx, dy);

    std::array<double, 4> dist{};
    const double lo = horiz ? std::min(s.x1, s.x2) : std::min(s.y1, s.y2);
    const double hi = horiz ? std::max(s.x1, s.x2) : std::max(s.y1, s.y2);
    const double e0 = horiz ? a.left : a.top;
    const double e1 = horiz ? a.right : a.bottom;
    const bool gated = overlap_ratio > 0 && std::min(hi, e1) - std::max(lo, e0) < overlap_ratio * (e1 - e0);
    const double my = (s.y1 + s.y2) / 2, mx = (s.x1 + s.x2) / 2;
    dist[0] = gated ? inf : std::abs(my - a.top);
    dist[1] = gated ? inf : std::abs(my - a.bottom);
    dist[2] = gated ? inf : std::abs(mx - a.left);
    dist[3] = gated ? inf : std::abs(mx - a.right);

    const int first = horiz ? 0 : 2;
    const int edge = dist[first] <= dist[first + 1] ? first : first + 1;
    if (gap <= theta && dist[edge] <= delta)
      pool[edge].push_back({static_cast<int>(j), dist[edge], len});
  }
  std::array<std::optional<Candidate>, 4> out;
  for (int e = 0; e < 4; ++e) {
    if (pool[e].empty()) continue;
    out[e] = *std::min_element(pool[e].begin(), pool[e].end(), [](const Candidate& p, const Candidate& q) {
      return std::make_tuple(p.distance, -p.length, p.segment) < std::make_tuple(q.distance, -q.length, q.segment);
    });
  }
  return out;
}

// Random anchor plus a segment set mixing near-edge, perturbed, duplicated and
// unrelated segments. Coordinates are on a quarter-pixel grid so that distance
// and length ties happen often.
struct AssignCase {
  facade::PixelRect anchor;
  std::vector<facade::LineSegment> segments;
};

inline AssignCase random_assign_case(std::mt19937_64& rng) {
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto q = [](double v) { return std::round(v * 4.0) / 4.0; };
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  AssignCase c;
  const int top = 20 + pick(80), left = 20 + pick(80);
  c.anchor = {top, top + 10 + pick(60), left, left + 10 + pick(60)};
  const auto& a = c.anchor;
  const int n = pick(14);
  for (int i = 0; i < n; ++i) {
    facade::LineSegment s;
    const int kind = pick(5);
    if (kind < 3) {
      const int edge = pick(4);
      const double off = q(uni(-25, 25)), tilt = q(uni(-4, 4));
      const double span0 = q(uni(-10, 20)), span1 = q(uni(-10, 20));
      if (edge < 2) {
        const double y = (edge == 0 ? a.top : a.bottom) + off;
        s = {a.left - span0, y - tilt, a.right + span1, y + tilt};
      } else {
        const double x = (edge == 2 ? a.left : a.right) + off;
        s = {x - tilt, a.top - span0, x + tilt, a.bottom + span1};
      }
    } else if (kind == 3 && !c.segments.empty()) {
      // Same midpoint offset as an earlier segment, different length.
      s = c.segments[pick(static_cast<int>(c.segments.size()))];
      const double grow = q(uni(0, 3)) * pick(2);
      if (std::abs(s.x2 - s.x1) >= std::abs(s.y2 - s.y1)) {
        s.x1 -= grow;
        s.x2 += grow;
      } else {
        s.y1 -= grow;
        s.y2 += grow;
      }
    } else {
      s = {q(uni(0, 200)), q(uni(0, 200)), q(uni(0, 200)), q(uni(0, 200))};
    }
    if (s.length() > 0) c.segments.push_back(s);
  }
  return c;
}

// Mode of the non-window classes on the 8-connected outer ring, by direct scan.
inline std::optional<int> ring_mode(const facade::LabelMask& mask, const std::vector<facade::Point>& pixels,
                                    int window_class) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::uint8_t> in(static_cast<std::size_t>(w) * h, 0);
  for (const auto& p : pixels) in[static_cast<std::size_t>(p.y) * w + p.x] = 1;
  std::vector<int> votes(mask.classes(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (in[static_cast<std::size_t>(y) * w + x]) continue;
      bool ring = false;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < w && ny < h && in[static_cast<std::size_t>(ny) * w + nx]) ring = true;
        }
      if (ring && mask.at(x, y) != window_class) ++votes[mask.at(x, y)];
    }
  const auto best = std::max_element(votes.begin(), votes.end());
  if (*best == 0) return std::nullopt;
  return static_cast<int>(best - votes.begin());
}

}  // namespace oracle
