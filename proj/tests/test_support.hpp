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

#include <stdlib.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <zlib.h>

#include "axps/label_io.hpp"
#include "axps/label_map.hpp"

namespace axps::testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "axps-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Map from an ASCII picture, one char per pixel; '.' is void and every other
// character is a segment id equal to its code.
inline PanopticLabelMap picture(const std::vector<std::string>& rows, const std::map<char, CategoryId>& cat) {
  std::vector<SegmentId> ids;
  std::map<SegmentId, CategoryId> category_of;
  for (const auto& row : rows) {
    for (char c : row) {
      ids.push_back(c == '.' ? 0 : static_cast<SegmentId>(c));
      if (c != '.') category_of[static_cast<SegmentId>(c)] = cat.at(c);
    }
  }
  return make_label_map(static_cast<std::uint32_t>(rows.front().size()), static_cast<std::uint32_t>(rows.size()),
                        std::move(ids), category_of);
}

// Minimal zip writer for archive fixtures; members are deflated when
// `deflate` is set and stored otherwise.
inline void write_zip(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::vector<std::uint8_t>>>& members,
                      bool deflate = true) {
  std::vector<std::uint8_t> out, central;
  auto put16 = [](std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
  };
  auto put32 = [&](std::vector<std::uint8_t>& v, std::uint32_t x) {
    put16(v, x & 0xffff);
    put16(v, x >> 16);
  };
  for (const auto& [name, data] : members) {
    const auto crc = static_cast<std::uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
    std::vector<std::uint8_t> body = data;
    if (deflate) {
      body.resize(compressBound(static_cast<uLong>(data.size())) + 16);
      z_stream zs{};
      deflateInit2(&zs, 6, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
      zs.next_in = const_cast<Bytef*>(data.data());
      zs.avail_in = static_cast<uInt>(data.size());
      zs.next_out = body.data();
      zs.avail_out = static_cast<uInt>(body.size());
      ::deflate(&zs, Z_FINISH);
      body.resize(zs.total_out);
      deflateEnd(&zs);
    }
    const auto offset = static_cast<std::uint32_t>(out.size());
    const std::uint16_t method = deflate ? 8 : 0;
    put32(out, 0x04034b50);
    for (std::uint32_t x : {20u, 0u, std::uint32_t{method}, 0u, 0u}) put16(out, x);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(body.size()));
    put32(out, static_cast<std::uint32_t>(data.size()));
    put16(out, static_cast<std::uint32_t>(name.size()));
    put16(out, 0);
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), body.begin(), body.end());

    put32(central, 0x02014b50);
    for (std::uint32_t x : {20u, 20u, 0u, std::uint32_t{method}, 0u, 0u}) put16(central, x);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(body.size()));
    put32(central, static_cast<std::uint32_t>(data.size()));
    put16(central, static_cast<std::uint32_t>(name.size()));
    for (int i = 0; i < 4; ++i) put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central.insert(central.end(), name.begin(), name.end());
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint32_t>(members.size()));
  put16(out, static_cast<std::uint32_t>(members.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  write_file(path, out);
}

// Every regular file under `dir`, keyed by its path relative to `dir`.
inline std::vector<std::pair<std::string, std::vector<std::uint8_t>>> directory_members(
    const std::filesystem::path& dir, const std::string& prefix = "") {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(prefix + e.path().filename().string(), read_file_bytes(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace axps::testing
