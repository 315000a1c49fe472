// Copyright 2026 The axps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "axps/categories.hpp"
#include "axps/condition.hpp"
#include "axps/error.hpp"
#include "axps/label_map.hpp"
#include "axps/png.hpp"

namespace axps {

// Segment ids are packed into 24-bit RGB: id = R + 256 G + 65536 B.
inline constexpr SegmentId kMaxEncodableId = (1u << 24) - 1;

inline constexpr SegmentId rgb_to_id(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return static_cast<SegmentId>(r) | (static_cast<SegmentId>(g) << 8) | (static_cast<SegmentId>(b) << 16);
}

struct DecodedLabelMap {
  PanopticLabelMap map;
  std::vector<std::string> warnings;
};

struct EncodedLabelMap {
  std::vector<std::uint8_t> png;
  std::string segments_json;
};

namespace detail {

inline nlohmann::json parse_json(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::malformed_json, std::string(what) + ": " + e.what());
  }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::string_view what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(Errc::missing_field, std::string(what) + ": missing '" + key + "'");
  }
  return obj.at(key);
}

}  // namespace detail

/// Decodes a panoptic PNG plus its segment sidecar. Areas are recomputed from
/// the pixels; a declared area that disagrees only produces a warning.
inline DecodedLabelMap decode_label_map(std::span<const std::uint8_t> png_bytes, std::string_view segments_json,
                                        const CategoryTable& cats) {
  const RgbImage image = decode_png(png_bytes);
  const auto doc = detail::parse_json(segments_json, "segments");

  for (const char* key : {"width", "height"}) {
    if (doc.is_object() && doc.contains(key)) {
      const auto& v = doc.at(key);
      const auto actual = key[0] == 'w' ? image.width : image.height;
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() != actual) {
        throw Error(Errc::dimension_mismatch, std::string("segments: declared ") + key + " " + v.dump() +
                                                  " but the PNG has " + std::to_string(actual));
      }
    }
  }
  const auto& list = detail::require(doc, "segments_info", "segments");
  if (!list.is_array()) throw Error(Errc::malformed_json, "segments: 'segments_info' must be an array");

  DecodedLabelMap out;
  auto& map = out.map;
  map.width = image.width;
  map.height = image.height;
  map.void_id = cats.void_id();
  map.ids.resize(map.pixel_count());
  for (std::size_t i = 0; i < map.ids.size(); ++i) {
    map.ids[i] = rgb_to_id(image.rgb[3 * i], image.rgb[3 * i + 1], image.rgb[3 * i + 2]);
  }
  auto counts = detail::count_ids(map.ids);

  for (const auto& item : list) {
    const auto& id_v = detail::require(item, "id", "segments");
    const auto& cat_v = detail::require(item, "category_id", "segments");
    if (!id_v.is_number_unsigned() || !cat_v.is_number_integer()) {
      throw Error(Errc::malformed_json, "segments: 'id' and 'category_id' must be integers");
    }
    const auto id = id_v.get<std::uint64_t>();
    if (id == 0 || id > kMaxEncodableId || id == map.void_id) {
      throw Error(Errc::segment_mismatch, "segments: invalid segment id " + std::to_string(id));
    }
    const auto category = cat_v.get<CategoryId>();
    if (!cats.contains(category)) {
      throw Error(Errc::unknown_category,
                  "segments: segment " + std::to_string(id) + " has unknown category " + std::to_string(category));
    }
    auto it = counts.find(static_cast<SegmentId>(id));
    if (it == counts.end()) {
      throw Error(Errc::segment_mismatch, "segments: segment " + std::to_string(id) + " does not occur in the PNG");
    }
    if (map.find(static_cast<SegmentId>(id)) != nullptr) {
      throw Error(Errc::segment_mismatch, "segments: duplicate segment " + std::to_string(id));
    }
    if (item.contains("area")) {
      const auto& area_v = item.at("area");
      if (!area_v.is_number_unsigned() || area_v.get<std::uint64_t>() != it->second) {
        out.warnings.push_back("segment " + std::to_string(id) + ": declared area " + area_v.dump() +
                               ", pixel count " + std::to_string(it->second));
      }
    }
    SegmentInfo seg{static_cast<SegmentId>(id), category, it->second};
    map.segments.insert(std::upper_bound(map.segments.begin(), map.segments.end(), seg,
                                         [](const SegmentInfo& a, const SegmentInfo& b) { return a.id < b.id; }),
                        seg);
  }

  for (const auto& [id, count] : counts) {
    if (id != map.void_id && map.find(id) == nullptr) {
      throw Error(Errc::segment_mismatch, "segments: PNG id " + std::to_string(id) + " (" +
                                              std::to_string(count) + " px) is not listed");
    }
  }
  return out;
}

inline EncodedLabelMap encode_label_map(const PanopticLabelMap& map) {
  if (map.ids.size() != map.pixel_count()) {
    throw Error(Errc::dimension_mismatch, "label map: grid size does not match width x height");
  }
  RgbImage image;
  image.width = map.width;
  image.height = map.height;
  image.rgb.resize(map.ids.size() * 3);
  for (std::size_t i = 0; i < map.ids.size(); ++i) {
    const SegmentId id = map.ids[i];
    if (id > kMaxEncodableId) {
      throw Error(Errc::unrepresentable_id, "label map: id " + std::to_string(id) + " does not fit in 24-bit RGB");
    }
    image.rgb[3 * i] = static_cast<std::uint8_t>(id & 0xff);
    image.rgb[3 * i + 1] = static_cast<std::uint8_t>((id >> 8) & 0xff);
    image.rgb[3 * i + 2] = static_cast<std::uint8_t>((id >> 16) & 0xff);
  }
  auto list = nlohmann::json::array();
  for (const auto& s : map.segments) {
    list.push_back({{"id", s.id}, {"category_id", s.category_id}, {"area", s.area}});
  }
  const nlohmann::json doc = {{"width", map.width}, {"height", map.height}, {"segments_info", list}};
  return {encode_png(image), doc.dump(1) + "\n"};
}

// ---------------------------------------------------------------------------
// Files

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, path.string() + ": write failed");
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// `<dir>/<stem>.png` pairs with `<dir>/<stem>_segments.json`.
inline std::filesystem::path sidecar_path(const std::filesystem::path& png_path) {
  auto p = png_path;
  p.replace_filename(png_path.stem().string() + "_segments.json");
  return p;
}

inline DecodedLabelMap load_label_map(const std::filesystem::path& png_path, const CategoryTable& cats) {
  const auto png = read_file_bytes(png_path);
  const auto json = read_file_text(sidecar_path(png_path));
  return decode_label_map(png, json, cats);
}

inline void save_label_map(const PanopticLabelMap& map, const std::filesystem::path& png_path) {
  const auto encoded = encode_label_map(map);
  write_file(png_path, encoded.png);
  write_file(sidecar_path(png_path), encoded.segments_json);
}

// ---------------------------------------------------------------------------
// Scene manifest

enum class Split { train, val, test };

inline constexpr std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

struct SceneManifest {
  std::string scene_id;
  ConditionTag condition;
  std::string gt_path;  // relative to the ground-truth root
  Split split = Split::val;

  friend bool operator==(const SceneManifest&, const SceneManifest&) = default;
};

inline std::vector<SceneManifest> load_manifest(std::string_view json_text) {
  const auto doc = detail::parse_json(json_text, "manifest");
  if (!doc.is_array()) throw Error(Errc::malformed_json, "manifest: expected an array");
  std::vector<SceneManifest> scenes;
  scenes.reserve(doc.size());
  std::set<std::string> seen;
  for (const auto& item : doc) {
    for (const char* key : {"scene_id", "condition", "gt_path", "split"}) {
      if (!detail::require(item, key, "manifest").is_string()) {
        throw Error(Errc::malformed_json, std::string("manifest: '") + key + "' must be a string");
      }
    }
    SceneManifest m;
    m.scene_id = item.at("scene_id").get<std::string>();
    if (m.scene_id.empty()) throw Error(Errc::missing_field, "manifest: empty scene_id");
    m.condition = ConditionTag::parse(item.at("condition").get<std::string>());
    m.gt_path = item.at("gt_path").get<std::string>();
    const auto split = item.at("split").get<std::string>();
    if (split == "train") {
      m.split = Split::train;
    } else if (split == "val") {
      m.split = Split::val;
    } else if (split == "test") {
      m.split = Split::test;
    } else {
      throw Error(Errc::malformed_json, "manifest: unknown split '" + split + "'");
    }
    if (!seen.insert(m.scene_id).second) {
      throw Error(Errc::duplicate_scene, "manifest: duplicate scene_id '" + m.scene_id + "'");
    }
    scenes.push_back(std::move(m));
  }
  return scenes;
}

inline std::string dump_manifest(const std::vector<SceneManifest>& scenes) {
  auto doc = nlohmann::json::array();
  for (const auto& m : scenes) {
    doc.push_back({{"scene_id", m.scene_id},
                   {"condition", m.condition.str()},
                   {"gt_path", m.gt_path},
                   {"split", to_string(m.split)}});
  }
  return doc.dump(1) + "\n";
}

}  // namespace axps
