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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <zlib.h>

#include "axps/error.hpp"
#include "axps/label_io.hpp"

namespace axps {

// Read-only view of a zip file held in memory. Supports stored and deflated
// members; zip64 and encrypted members are rejected.
class ZipReader {
 public:
  explicit ZipReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) { index(); }

  static ZipReader open(const std::filesystem::path& path) { return ZipReader(read_file_bytes(path)); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, entry] : entries_) out.push_back(name);
    return out;
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  std::vector<std::uint8_t> read(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw Error(Errc::archive, "zip: no member '" + name + "'");
    const Entry& e = it->second;
    if (u32(e.local_offset) != kLocalSig) throw Error(Errc::archive, "zip: bad local header for '" + name + "'");
    const std::size_t data = e.local_offset + 30 + u16(e.local_offset + 26) + u16(e.local_offset + 28);
    if (data > bytes_.size() || e.compressed > bytes_.size() - data) {
      throw Error(Errc::archive, "zip: member '" + name + "' runs past the end of the archive");
    }
    std::vector<std::uint8_t> out(e.uncompressed);
    if (e.method == 0) {
      if (e.compressed != e.uncompressed) throw Error(Errc::archive, "zip: size mismatch in '" + name + "'");
      std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(data), e.compressed, out.begin());
    } else {
      inflate_raw(std::span(bytes_).subspan(data, e.compressed), out, name);
    }
    const auto crc = crc32(0L, out.data(), static_cast<uInt>(out.size()));
    if (crc != e.crc) throw Error(Errc::archive, "zip: checksum mismatch in '" + name + "'");
    return out;
  }

 private:
  static constexpr std::uint32_t kLocalSig = 0x04034b50;
  static constexpr std::uint32_t kCentralSig = 0x02014b50;
  static constexpr std::uint32_t kEndSig = 0x06054b50;

  struct Entry {
    std::uint16_t method = 0;
    std::uint32_t crc = 0;
    std::size_t compressed = 0;
    std::size_t uncompressed = 0;
    std::size_t local_offset = 0;
  };

  std::uint16_t u16(std::size_t at) const {
    if (at + 2 > bytes_.size()) throw Error(Errc::archive, "zip: truncated archive");
    return static_cast<std::uint16_t>(bytes_[at] | (bytes_[at + 1] << 8));
  }

  std::uint32_t u32(std::size_t at) const {
    return static_cast<std::uint32_t>(u16(at)) | (static_cast<std::uint32_t>(u16(at + 2)) << 16);
  }

  void index() {
    if (bytes_.size() < 22) throw Error(Errc::archive, "zip: too short to be an archive");
    std::optional<std::size_t> end;
    const std::size_t lowest = bytes_.size() > 22 + 0xffff ? bytes_.size() - 22 - 0xffff : 0;
    for (std::size_t at = bytes_.size() - 22 + 1; at-- > lowest;) {
      if (u32(at) == kEndSig) {
        end = at;
        break;
      }
    }
    if (!end) throw Error(Errc::archive, "zip: end of central directory not found");
    const std::size_t count = u16(*end + 10);
    std::size_t at = u32(*end + 16);
    if (count == 0xffff || at == 0xffffffffu) throw Error(Errc::archive, "zip: zip64 archives are not supported");
    for (std::size_t i = 0; i < count; ++i) {
      if (u32(at) != kCentralSig) throw Error(Errc::archive, "zip: corrupt central directory");
      Entry e;
      const auto flags = u16(at + 8);
      e.method = u16(at + 10);
      e.crc = u32(at + 16);
      e.compressed = u32(at + 20);
      e.uncompressed = u32(at + 24);
      const std::size_t name_len = u16(at + 28);
      const std::size_t extra_len = u16(at + 30);
      const std::size_t comment_len = u16(at + 32);
      e.local_offset = u32(at + 42);
      if (at + 46 + name_len > bytes_.size()) throw Error(Errc::archive, "zip: truncated central directory");
      std::string name(reinterpret_cast<const char*>(bytes_.data() + at + 46), name_len);
      if (flags & 0x1) throw Error(Errc::archive, "zip: encrypted member '" + name + "'");
      if (e.method != 0 && e.method != 8) {
        throw Error(Errc::archive, "zip: unsupported compression method for '" + name + "'");
      }
      if (!name.empty() && name.back() != '/') entries_[name] = e;
      at += 46 + name_len + extra_len + comment_len;
    }
  }

  static void inflate_raw(std::span<const std::uint8_t> in, std::vector<std::uint8_t>& out, const std::string& name) {
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(Errc::archive, "zip: inflate init failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != out.size()) {
      throw Error(Errc::archive, "zip: cannot inflate '" + name + "'");
    }
  }

  std::vector<std::uint8_t> bytes_;
  std::map<std::string, Entry> entries_;
};

struct PredictionFiles {
  std::vector<std::uint8_t> png;
  std::string segments_json;
};

// A prediction upload: `<scene_id>.png` + `<scene_id>_segments.json`, either
// at the top level or one directory down, in a directory or a zip file.
class SubmissionArchive {
 public:
  static SubmissionArchive open(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    SubmissionArchive archive;
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
      archive.root_ = path;
      for (auto it = fs::recursive_directory_iterator(path, ec); !ec && it != fs::recursive_directory_iterator();
           it.increment(ec)) {
        if (it.depth() > 1) {
          it.disable_recursion_pending();
          continue;
        }
        if (it->is_regular_file()) {
          archive.add(fs::relative(it->path(), path).generic_string());
        }
      }
      if (ec) throw Error(Errc::archive, path.string() + ": " + ec.message());
    } else if (fs::is_regular_file(path, ec)) {
      archive.zip_.emplace(ZipReader::open(path));
      for (const auto& name : archive.zip_->names()) archive.add(name);
    } else {
      throw Error(Errc::archive, path.string() + ": archive not found");
    }
    return archive;
  }

  std::vector<std::string> scene_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, item] : items_) {
      if (!item.png.empty()) out.push_back(id);
    }
    return out;
  }

  bool has_png(const std::string& scene_id) const {
    auto it = items_.find(scene_id);
    return it != items_.end() && !it->second.png.empty();
  }

  bool has_sidecar(const std::string& scene_id) const {
    auto it = items_.find(scene_id);
    return it != items_.end() && !it->second.json.empty();
  }

  /// Layout problems found while indexing (duplicate stems, orphan sidecars).
  const std::vector<std::pair<std::string, std::string>>& layout_faults() const noexcept { return faults_; }

  PredictionFiles read(const std::string& scene_id) const {
    auto it = items_.find(scene_id);
    if (it == items_.end() || it->second.png.empty()) {
      throw Error(Errc::archive, "archive: no prediction for scene '" + scene_id + "'");
    }
    if (it->second.json.empty()) {
      throw Error(Errc::archive, "archive: missing segments sidecar for scene '" + scene_id + "'");
    }
    PredictionFiles files;
    files.png = load(it->second.png);
    const auto json = load(it->second.json);
    files.segments_json.assign(json.begin(), json.end());
    return files;
  }

 private:
  struct Item {
    std::string png;
    std::string json;
  };

  void add(const std::string& relative) {
    const auto slash = relative.find('/');
    if (slash != std::string::npos && relative.find('/', slash + 1) != std::string::npos) return;
    const std::string file = slash == std::string::npos ? relative : relative.substr(slash + 1);
    if (file.empty() || file.front() == '.' || relative.rfind("__MACOSX", 0) == 0) return;

    constexpr std::string_view kPng = ".png";
    constexpr std::string_view kSidecar = "_segments.json";
    auto ends_with = [&](std::string_view suffix) {
      return file.size() > suffix.size() && file.compare(file.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(kSidecar)) {
      set(file.substr(0, file.size() - kSidecar.size()), &Item::json, relative);
    } else if (ends_with(kPng)) {
      set(file.substr(0, file.size() - kPng.size()), &Item::png, relative);
    }
  }

  void set(const std::string& scene_id, std::string Item::*slot, const std::string& relative) {
    auto& item = items_[scene_id];
    if (!(item.*slot).empty()) {
      faults_.emplace_back(scene_id, "duplicate file: " + item.*slot + " and " + relative);
      return;
    }
    item.*slot = relative;
  }

  std::vector<std::uint8_t> load(const std::string& relative) const {
    if (zip_) return zip_->read(relative);
    return read_file_bytes(root_ / relative);
  }

  std::filesystem::path root_;
  std::optional<ZipReader> zip_;
  std::map<std::string, Item> items_;
  std::vector<std::pair<std::string, std::string>> faults_;
};

}  // namespace axps
