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

#include <stdexcept>
#include <string>
#include <string_view>

namespace axps {

// Every failure the library reports carries one of these codes so callers can
// branch on the kind of problem without parsing messages.
enum class Errc {
  malformed_png,
  malformed_json,
  segment_mismatch,
  unknown_category,
  dimension_mismatch,
  unrepresentable_id,
  duplicate_scene,
  unknown_condition,
  missing_field,
  invalid_argument,
  no_present_classes,
  zero_weight,
  quota_exhausted,
  archive,
  io,
  corrupt_ledger,
};

inline constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_png: return "malformed_png";
    case Errc::malformed_json: return "malformed_json";
    case Errc::segment_mismatch: return "segment_mismatch";
    case Errc::unknown_category: return "unknown_category";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::unrepresentable_id: return "unrepresentable_id";
    case Errc::duplicate_scene: return "duplicate_scene";
    case Errc::unknown_condition: return "unknown_condition";
    case Errc::missing_field: return "missing_field";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::no_present_classes: return "no_present_classes";
    case Errc::zero_weight: return "zero_weight";
    case Errc::quota_exhausted: return "quota_exhausted";
    case Errc::archive: return "archive";
    case Errc::io: return "io";
    case Errc::corrupt_ledger: return "corrupt_ledger";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace axps
