#pragma once

// JSON schemas for segment lists and revision reports.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/lafr.hpp"
#include "facade/lsd.hpp"

namespace facade {

using ojson = nlohmann::ordered_json;

// {"segments": [[x1, y1, x2, y2], ...]}
inline ojson segments_to_json(const std::vector<LineSegment>& segs) {
  ojson arr = ojson::array();
  for (const auto& s : segs) arr.push_back({s.x1, s.y1, s.x2, s.y2});
  return {{"segments", arr}};
}

inline std::vector<LineSegment> segments_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("segments") || !j["segments"].is_array())
    throw FormatError("lines: expected {\"segments\": [[x1,y1,x2,y2], ...]}");
  std::vector<LineSegment> out;
  for (const auto& s : j["segments"]) {
    if (!s.is_array() || s.size() != 4)
      throw FormatError("lines: each segment must be [x1, y1, x2, y2]");
    for (const auto& v : s)
      if (!v.is_number()) throw FormatError("lines: segment coordinates must be numbers");
    LineSegment seg{s[0].get<double>(), s[1].get<double>(), s[2].get<double>(), s[3].get<double>()};
    if (!(seg.length() > 0.0)) throw FormatError("lines: zero-length segment");
    out.push_back(seg);
  }
  return out;
}

inline ojson rect_to_json(const PixelRect& r) {
  return {{"top", r.top}, {"bottom", r.bottom}, {"left", r.left}, {"right", r.right}};
}

inline ojson rect_to_json(const Rect& r) {
  return {{"top", r.top}, {"bottom", r.bottom}, {"left", r.left}, {"right", r.right}};
}

inline ojson revision_to_json(const RevisionResult& res) {
  ojson anchors = ojson::array();
  for (std::size_t i = 0; i < res.assignments.size(); ++i) {
    const auto& a = res.assignments[i];
    ojson edges;
    for (Edge e : kEdges) {
      const auto& slot = a.slot(e);
      if (slot)
        edges[edge_name(e)] = {{"segment", slot->segment}, {"distance", slot->distance}};
      else
        edges[edge_name(e)] = nullptr;
    }
    ojson entry;
    entry["id"] = a.anchor_id;
    entry["anchor"] = rect_to_json(res.instances.at(i).anchor);
    entry["pixels"] = res.instances.at(i).component.pixel_count;
    entry["edges"] = edges;
    entry["filled"] = a.filled();
    entry["integrated"] = a.integrated ? rect_to_json(*a.integrated) : ojson(nullptr);
    entry["status"] = a.integrated ? "revised" : "discarded";
    anchors.push_back(entry);
  }
  ojson j;
  j["summary"] = {{"total", res.stats.total},
                  {"revised", res.stats.revised},
                  {"discarded", res.stats.discarded},
                  {"overlap_pixels", res.stats.overlap_pixels},
                  {"segments", res.segments.size()}};
  j["anchors"] = anchors;
  return j;
}

inline void write_json(const std::filesystem::path& path, const ojson& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace facade
