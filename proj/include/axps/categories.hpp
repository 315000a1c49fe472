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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "axps/error.hpp"

namespace axps {

using CategoryId = std::int32_t;
using SegmentId = std::uint32_t;

struct Category {
  CategoryId id = 0;
  std::string name;
  bool is_thing = false;

  friend bool operator==(const Category&, const Category&) = default;
};

// Class taxonomy plus the segment id that marks unlabeled pixels.
class CategoryTable {
 public:
  CategoryTable() = default;

  CategoryTable(std::vector<Category> entries, SegmentId void_id = 0)
      : entries_(std::move(entries)), void_id_(void_id) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Category& a, const Category& b) { return a.id < b.id; });
    validate();
  }

  // The 19 evaluated Cityscapes classes, keyed by their Cityscapes label ids.
  static CategoryTable cityscapes() {
    return CategoryTable({
        {7, "road", false},          {8, "sidewalk", false},   {11, "building", false},
        {12, "wall", false},         {13, "fence", false},     {17, "pole", false},
        {19, "traffic light", false}, {20, "traffic sign", false},
        {21, "vegetation", false},   {22, "terrain", false},   {23, "sky", false},
        {24, "person", true},        {25, "rider", true},      {26, "car", true},
        {27, "truck", true},         {28, "bus", true},        {31, "train", true},
        {32, "motorcycle", true},    {33, "bicycle", true},
    });
  }

  /// Parses `categories.json`: an array of {id, name, is_thing}, or an object
  /// {"void_id": n, "categories": [...]} when the void sentinel is overridden.
  static CategoryTable from_json(const nlohmann::json& doc) {
    const nlohmann::json* list = &doc;
    SegmentId void_id = 0;
    if (doc.is_object()) {
      if (!doc.contains("categories")) {
        throw Error(Errc::missing_field, "categories: missing 'categories'");
      }
      list = &doc.at("categories");
      if (doc.contains("void_id")) {
        if (!doc.at("void_id").is_number_unsigned()) {
          throw Error(Errc::malformed_json, "categories: 'void_id' must be a non-negative integer");
        }
        void_id = doc.at("void_id").get<SegmentId>();
      }
    }
    if (!list->is_array()) {
      throw Error(Errc::malformed_json, "categories: expected an array");
    }
    std::vector<Category> entries;
    for (const auto& item : *list) {
      for (const char* key : {"id", "name", "is_thing"}) {
        if (!item.is_object() || !item.contains(key)) {
          throw Error(Errc::missing_field, std::string("categories: entry missing '") + key + "'");
        }
      }
      if (!item.at("id").is_number_integer() || !item.at("name").is_string() ||
          !item.at("is_thing").is_boolean()) {
        throw Error(Errc::malformed_json, "categories: entry has a field of the wrong type");
      }
      entries.push_back(
          {item.at("id").get<CategoryId>(), item.at("name").get<std::string>(), item.at("is_thing").get<bool>()});
    }
    return CategoryTable(std::move(entries), void_id);
  }

  nlohmann::json to_json() const {
    auto list = nlohmann::json::array();
    for (const auto& c : entries_) {
      list.push_back({{"id", c.id}, {"name", c.name}, {"is_thing", c.is_thing}});
    }
    if (void_id_ == 0) return list;
    return {{"void_id", void_id_}, {"categories", list}};
  }

  const std::vector<Category>& entries() const noexcept { return entries_; }
  SegmentId void_id() const noexcept { return void_id_; }
  std::size_t size() const noexcept { return entries_.size(); }

  const Category* find(CategoryId id) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const Category& c, CategoryId v) { return c.id < v; });
    return (it != entries_.end() && it->id == id) ? &*it : nullptr;
  }

  bool contains(CategoryId id) const noexcept { return find(id) != nullptr; }

  friend bool operator==(const CategoryTable&, const CategoryTable&) = default;

 private:
  void validate() const {
    std::set<CategoryId> seen;
    for (const auto& c : entries_) {
      if (!seen.insert(c.id).second) {
        throw Error(Errc::invalid_argument, "categories: duplicate id " + std::to_string(c.id));
      }
    }
    if (seen.count(static_cast<CategoryId>(void_id_)) != 0) {
      throw Error(Errc::invalid_argument,
                  "categories: void id " + std::to_string(void_id_) + " collides with a category id");
    }
  }

  std::vector<Category> entries_;
  SegmentId void_id_ = 0;
};

}  // namespace axps
