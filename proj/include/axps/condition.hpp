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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "axps/error.hpp"

namespace axps {

enum class Weather : std::uint8_t { clear, fog, rain, snow };
enum class TimeOfDay : std::uint8_t { day, night };

inline constexpr std::array<Weather, 4> kAllWeathers = {Weather::clear, Weather::fog,
                                                        Weather::rain, Weather::snow};

inline constexpr std::string_view to_string(Weather w) noexcept {
  switch (w) {
    case Weather::clear: return "clear";
    case Weather::fog: return "fog";
    case Weather::rain: return "rain";
    case Weather::snow: return "snow";
  }
  return "?";
}

inline constexpr std::string_view to_string(TimeOfDay t) noexcept {
  return t == TimeOfDay::day ? "day" : "night";
}

/// One cell of the weather x time-of-day grid.
struct ConditionTag {
  Weather weather = Weather::clear;
  TimeOfDay tod = TimeOfDay::day;

  friend constexpr auto operator<=>(const ConditionTag&, const ConditionTag&) = default;

  /// Dense index in [0, 8): weather-major, day before night.
  constexpr std::size_t index() const noexcept {
    return static_cast<std::size_t>(weather) * 2 + static_cast<std::size_t>(tod);
  }

  std::string str() const {
    std::string s(to_string(weather));
    s += '/';
    s += to_string(tod);
    return s;
  }

  /// Parses "<weather>/<tod>", e.g. "fog/night".
  static ConditionTag parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
      throw Error(Errc::unknown_condition, "unknown condition '" + std::string(text) + "'");
    }
    const auto weather = text.substr(0, slash);
    const auto tod = text.substr(slash + 1);
    ConditionTag tag;
    bool weather_ok = false;
    for (auto w : kAllWeathers) {
      if (weather == to_string(w)) {
        tag.weather = w;
        weather_ok = true;
      }
    }
    bool tod_ok = true;
    if (tod == "day") {
      tag.tod = TimeOfDay::day;
    } else if (tod == "night") {
      tag.tod = TimeOfDay::night;
    } else {
      tod_ok = false;
    }
    if (!weather_ok || !tod_ok) {
      throw Error(Errc::unknown_condition, "unknown condition '" + std::string(text) + "'");
    }
    return tag;
  }
};

inline constexpr std::array<ConditionTag, 8> kAllConditions = {{
    {Weather::clear, TimeOfDay::day},
    {Weather::clear, TimeOfDay::night},
    {Weather::fog, TimeOfDay::day},
    {Weather::fog, TimeOfDay::night},
    {Weather::rain, TimeOfDay::day},
    {Weather::rain, TimeOfDay::night},
    {Weather::snow, TimeOfDay::day},
    {Weather::snow, TimeOfDay::night},
}};

}  // namespace axps
