#pragma once

// Line acquisition, filtering and revision: snaps predicted window regions to
// rectangles framed by detected line segments.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "facade/image.hpp"
#include "facade/lsd.hpp"
#include "facade/raster.hpp"

namespace facade {

enum class Edge { Top = 0, Bottom = 1, Left = 2, Right = 3 };

inline constexpr std::array<Edge, 4> kEdges = {Edge::Top, Edge::Bottom, Edge::Left, Edge::Right};

inline const char* edge_name(Edge e) {
  switch (e) {
    case Edge::Top: return "top";
    case Edge::Bottom: return "bottom";
    case Edge::Left: return "left";
    case Edge::Right: return "right";
  }
  return "?";
}

inline bool is_horizontal(Edge e) { return e == Edge::Top || e == Edge::Bottom; }

struct BlurStep {
  int kernel = 5;
  double sigma = 5.0;
};

struct LafrParams {
  double delta = 20.0;  // max edge distance, pixels
  double theta = 0.1;   // max angle gap, radians
  int window_class = 1;
  std::optional<int> replacement_class;
  std::array<BlurStep, 2> blur = {BlurStep{5, 5.0}, BlurStep{3, 5.0}};
  int morph_radius = 1;
  int morph_iterations = 2;
  Connectivity connectivity = Connectivity::Four;
  int min_component_area = 30;
  // Minimum overlap of a segment's projection with the edge span, as a
  // fraction of edge length. Zero disables the gate.
  double overlap_ratio = 0.3;

  void validate(int classes) const {
    if (!(delta > 0.0)) throw std::invalid_argument("lafr: delta must be positive");
    if (!(theta > 0.0 && theta < std::numbers::pi / 4))
      throw std::invalid_argument("lafr: theta must be in (0, pi/4)");
    if (window_class < 0 || window_class >= classes)
      throw std::invalid_argument("lafr: window class " + std::to_string(window_class) +
                                  " outside palette of " + std::to_string(classes));
    if (replacement_class && (*replacement_class < 0 || *replacement_class >= classes))
      throw std::invalid_argument("lafr: replacement class out of range");
    if (morph_radius < 1 || morph_iterations < 1)
      throw std::invalid_argument("lafr: morphology radius and iterations must be >= 1");
    if (min_component_area < 0) throw std::invalid_argument("lafr: negative min component area");
    if (!(overlap_ratio >= 0.0 && overlap_ratio <= 1.0))
      throw std::invalid_argument("lafr: overlap ratio must be in [0, 1]");
  }
};

struct WindowInstance {
  ConnectedComponent component;
  PixelRect anchor;  // minimum external rectangle of the component
};

struct EdgeSlot {
  int segment = -1;
  double distance = 0.0;
  bool operator==(const EdgeSlot&) const = default;
};

struct EdgeAssignment {
  int anchor_id = 0;
  std::array<std::optional<EdgeSlot>, 4> edges;
  std::optional<Rect> integrated;

  const std::optional<EdgeSlot>& slot(Edge e) const { return edges[static_cast<int>(e)]; }
  std::optional<EdgeSlot>& slot(Edge e) { return edges[static_cast<int>(e)]; }
  int filled() const {
    return static_cast<int>(std::count_if(edges.begin(), edges.end(),
                                          [](const auto& s) { return s.has_value(); }));
  }
  bool complete() const { return filled() == 4; }
};

struct RevisionStats {
  int total = 0;
  int revised = 0;
  int discarded = 0;
  std::size_t overlap_pixels = 0;  // pixels filled by more than one rectangle
};

struct RevisionResult {
  LabelMask revised;
  std::vector<WindowInstance> instances;
  std::vector<LineSegment> segments;
  std::vector<EdgeAssignment> assignments;
  RevisionStats stats;
};

// Window pixels -> opening -> components -> area filter -> anchors.
inline std::vector<WindowInstance> acquire_instances(const LabelMask& mask, const LafrParams& params) {
  if (params.window_class < 0 || params.window_class >= mask.classes())
    throw std::invalid_argument("acquire_instances: window class outside mask class range");
  const BinaryMask windows = BinaryMask::from_class(mask, params.window_class);
  const BinaryMask opened = open(windows, params.morph_radius, params.morph_iterations);
  std::vector<WindowInstance> out;
  for (auto& cc : connected_components(opened, params.connectivity)) {
    if (static_cast<int>(cc.pixel_count) < params.min_component_area) continue;
    const PixelRect r = cc.bounding_rect;
    if (r.top >= r.bottom || r.left >= r.right) continue;
    out.push_back({std::move(cc), r});
  }
  return out;
}

// Smallest angle between the undirected segment and the edge orientation.
inline double edge_angle_gap(const LineSegment& seg, Edge edge) {
  if (!(seg.length() > 0.0)) throw std::invalid_argument("edge_angle_gap: zero-length segment");
  const double orient = is_horizontal(edge) ? 0.0 : std::numbers::pi / 2;
  double d = std::fmod(std::abs(seg.angle() - orient), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

// Perpendicular distance from the segment midpoint to the line through the
// anchor edge; +infinity when the segment's projection overlaps less than
// overlap_ratio of the edge span.
inline double edge_distance(const PixelRect& anchor, const LineSegment& seg, Edge edge,
                            double overlap_ratio = LafrParams{}.overlap_ratio) {
  if (!(seg.length() > 0.0)) throw std::invalid_argument("edge_distance: zero-length segment");
  const bool horiz = is_horizontal(edge);
  if (overlap_ratio > 0.0) {
    const double a0 = horiz ? std::min(seg.x1, seg.x2) : std::min(seg.y1, seg.y2);
    const double a1 = horiz ? std::max(seg.x1, seg.x2) : std::max(seg.y1, seg.y2);
    const double e0 = horiz ? anchor.left : anchor.top;
    const double e1 = horiz ? anchor.right : anchor.bottom;
    const double overlap = std::min(a1, e1) - std::max(a0, e0);
    if (overlap < overlap_ratio * (e1 - e0)) return std::numeric_limits<double>::infinity();
  }
  switch (edge) {
    case Edge::Top: return std::abs(seg.mid_y() - anchor.top);
    case Edge::Bottom: return std::abs(seg.mid_y() - anchor.bottom);
    case Edge::Left: return std::abs(seg.mid_x() - anchor.left);
    case Edge::Right: return std::abs(seg.mid_x() - anchor.right);
  }
  return std::numeric_limits<double>::infinity();
}

// Each segment competes only for the nearer of the two edges matching its
// orientation. Per edge the smallest distance wins; ties go to the longer
// segment, then the lower index.
inline EdgeAssignment assign_segments(const WindowInstance& instance,
                                      const std::vector<LineSegment>& segments,
                                      const LafrParams& params, int anchor_id = 0) {
  EdgeAssignment out;
  out.anchor_id = anchor_id;
  for (std::size_t j = 0; j < segments.size(); ++j) {
    const LineSegment& s = segments[j];
    if (!(s.length() > 0.0)) continue;
    const bool horiz = edge_angle_gap(s, Edge::Top) <= edge_angle_gap(s, Edge::Left);
    const Edge a = horiz ? Edge::Top : Edge::Left;
    const Edge b = horiz ? Edge::Bottom : Edge::Right;
    const double da = edge_distance(instance.anchor, s, a, params.overlap_ratio);
    const double db = edge_distance(instance.anchor, s, b, params.overlap_ratio);
    const Edge e = da <= db ? a : b;
    const double dist = std::min(da, db);
    if (edge_angle_gap(s, e) > params.theta || !(dist <= params.delta)) continue;

    auto& slot = out.slot(e);
    bool take = !slot.has_value();
    if (!take) {
      const double cur_len = segments[slot->segment].length();
      take = dist < slot->distance ||
             (dist == slot->distance &&
              (s.length() > cur_len ||
               (s.length() == cur_len && static_cast<int>(j) < slot->segment)));
    }
    if (take) slot = EdgeSlot{static_cast<int>(j), dist};
  }
  return out;
}

// Fuses four assigned segments into an axis-aligned rectangle from endpoint
// means; none when an edge is blank or the result is degenerate.
inline std::optional<Rect> integrate(const EdgeAssignment& assignment,
                                     const std::vector<LineSegment>& segments) {
  if (!assignment.complete()) return std::nullopt;
  auto seg = [&](Edge e) -> const LineSegment& {
    return segments.at(static_cast<std::size_t>(assignment.slot(e)->segment));
  };
  Rect r;
  r.top = 0.5 * (seg(Edge::Top).y1 + seg(Edge::Top).y2);
  r.bottom = 0.5 * (seg(Edge::Bottom).y1 + seg(Edge::Bottom).y2);
  r.left = 0.5 * (seg(Edge::Left).x1 + seg(Edge::Left).x2);
  r.right = 0.5 * (seg(Edge::Right).x1 + seg(Edge::Right).x2);
  if (r.degenerate()) return std::nullopt;
  return r;
}

// Pixels whose centers fall inside r, clipped to the image.
inline std::optional<PixelRect> rasterize(const Rect& r, int width, int height) {
  PixelRect p;
  p.top = std::max(0, static_cast<int>(std::ceil(r.top)));
  p.bottom = std::min(height - 1, static_cast<int>(std::floor(r.bottom)));
  p.left = std::max(0, static_cast<int>(std::ceil(r.left)));
  p.right = std::min(width - 1, static_cast<int>(std::floor(r.right)));
  if (p.top > p.bottom || p.left > p.right) return std::nullopt;
  return p;
}

// Most frequent non-window class on the 8-connected outer ring of a component,
// read from `mask`; ties go to the smaller class index.
inline std::optional<int> boundary_mode(const LabelMask& mask, const ConnectedComponent& cc,
                                        int window_class) {
  const PixelRect b = cc.bounding_rect;
  const int bw = b.width() + 2, bh = b.height() + 2;
  std::vector<std::uint8_t> member(static_cast<std::size_t>(bw) * bh, 0);
  for (const Point& p : cc.pixels)
    member[static_cast<std::size_t>(p.y - b.top + 1) * bw + (p.x - b.left + 1)] = 1;
  std::vector<std::size_t> votes(mask.classes(), 0);
  for (int ly = 0; ly < bh; ++ly)
    for (int lx = 0; lx < bw; ++lx) {
      if (member[static_cast<std::size_t>(ly) * bw + lx]) continue;
      const int x = lx + b.left - 1, y = ly + b.top - 1;
      if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height()) continue;
      bool touches = false;
      for (int dy = -1; dy <= 1 && !touches; ++dy)
        for (int dx = -1; dx <= 1 && !touches; ++dx) {
          const int nx = lx + dx, ny = ly + dy;
          if (nx >= 0 && ny >= 0 && nx < bw && ny < bh && member[static_cast<std::size_t>(ny) * bw + nx])
            touches = true;
        }
      if (!touches) continue;
      const int cls = mask.at(x, y);
      if (cls != window_class) ++votes[cls];
    }
  std::optional<int> best;
  for (int c = 0; c < mask.classes(); ++c)
    if (votes[c] > 0 && (!best || votes[c] > votes[*best])) best = c;
  return best;
}

// Clears every revisable component to its surrounding class, then paints the
// integrated rectangles with the window class in ascending anchor order.
inline RevisionResult revise(const LabelMask& mask, const std::vector<WindowInstance>& instances,
                             const std::vector<EdgeAssignment>& assignments,
                             const LafrParams& params) {
  params.validate(mask.classes());
  if (instances.size() != assignments.size())
    throw std::invalid_argument("revise: instances and assignments differ in count");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (assignments[i].anchor_id != static_cast<int>(i))
      throw std::invalid_argument("revise: assignment order does not match instances");
    const PixelRect& b = instances[i].component.bounding_rect;
    if (b.top < 0 || b.left < 0 || b.bottom >= mask.height() || b.right >= mask.width())
      throw std::invalid_argument("revise: instance outside mask bounds (dimension mismatch)");
  }

  RevisionResult res;
  res.revised = mask;
  res.instances = instances;
  res.assignments = assignments;
  res.stats.total = static_cast<int>(instances.size());

  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!assignments[i].integrated) continue;
    const auto& cc = instances[i].component;
    const int fill = boundary_mode(mask, cc, params.window_class)
                         .value_or(params.replacement_class.value_or(0));
    for (const Point& p : cc.pixels) res.revised.at(p.x, p.y) = static_cast<std::uint8_t>(fill);
  }

  std::vector<std::uint8_t> painted(mask.size(), 0);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& integ = assignments[i].integrated;
    if (!integ) {
      ++res.stats.discarded;
      continue;
    }
    ++res.stats.revised;
    const auto px = rasterize(*integ, mask.width(), mask.height());
    if (!px) continue;
    for (int y = px->top; y <= px->bottom; ++y)
      for (int x = px->left; x <= px->right; ++x) {
        auto& seen = painted[static_cast<std::size_t>(y) * mask.width() + x];
        if (seen == 1) ++res.stats.overlap_pixels;
        seen = std::min<int>(seen + 1, 2);
        res.revised.at(x, y) = static_cast<std::uint8_t>(params.window_class);
      }
  }
  return res;
}

// Filtering and revision against an already-detected segment set.
inline RevisionResult revise_with_segments(const LabelMask& preliminary,
                                           std::vector<LineSegment> segments,
                                           const LafrParams& params) {
  params.validate(preliminary.classes());
  auto instances = acquire_instances(preliminary, params);
  std::vector<EdgeAssignment> assignments;
  assignments.reserve(instances.size());
  for (std::size_t b = 0; b < instances.size(); ++b) {
    auto a = assign_segments(instances[b], segments, params, static_cast<int>(b));
    a.integrated = integrate(a, segments);
    assignments.push_back(std::move(a));
  }
  auto res = revise(preliminary, instances, assignments, params);
  res.segments = std::move(segments);
  return res;
}

// Grayscale, the two Gaussian blurs, then line detection.
inline std::vector<LineSegment> acquire_lines(const ImageBuffer& image, const LafrParams& params,
                                              const LsdParams& lsd = {}) {
  ImageBuffer gray = to_grayscale(image);
  for (const auto& step : params.blur) gray = gaussian_blur(gray, step.kernel, step.sigma);
  return detect_lines(gray, lsd);
}

inline RevisionResult run_lafr(const ImageBuffer& image, const LabelMask& preliminary,
                               const LafrParams& params = {}, const LsdParams& lsd = {}) {
  if (image.width() != preliminary.width() || image.height() != preliminary.height())
    throw std::invalid_argument("run_lafr: image " + std::to_string(image.width()) + "x" +
                                std::to_string(image.height()) + " does not match mask " +
                                std::to_string(preliminary.width()) + "x" +
                                std::to_string(preliminary.height()));
  params.validate(preliminary.classes());
  return revise_with_segments(preliminary, acquire_lines(image, params, lsd), params);
}

}  // namespace facade
