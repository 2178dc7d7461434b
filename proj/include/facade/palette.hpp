#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"

namespace facade {

// Class names keyed by dense mask index.
class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<std::string> names) : names_(std::move(names)) {}

  // The nine facade classes, in mask index order.
  static Palette cfp() {
    return Palette({"building", "window", "door", "roof", "tree", "sky", "person", "car",
                    "sign"});
  }

  static Palette from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array())
      throw FormatError("palette: expected {\"classes\": [...]}");
    const auto& arr = j["classes"];
    std::vector<std::optional<std::string>> slots(arr.size());
    for (const auto& c : arr) {
      if (!c.contains("name") || !c.contains("index") || !c["name"].is_string() ||
          !c["index"].is_number_integer())
        throw FormatError("palette: each class needs a string name and integer index");
      const auto idx = c["index"].get<long long>();
      if (idx < 0 || idx >= static_cast<long long>(slots.size()) || slots[idx])
        throw FormatError("palette: indices must be dense from 0 and unique");
      slots[idx] = c["name"].get<std::string>();
    }
    std::vector<std::string> names;
    for (auto& s : slots) names.push_back(*s);
    if (names.empty() || names.size() > 256) throw FormatError("palette: 1..256 classes required");
    return Palette(std::move(names));
  }

  static Palette load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open palette " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("palette " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < names_.size(); ++i)
      arr.push_back({{"name", names_[i]}, {"index", i}});
    return {{"classes", arr}};
  }

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<int> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }

 private:
  std::vector<std::string> names_;
};

}  // namespace facade
