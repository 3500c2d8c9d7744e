// Copyright 2026 The drsp Authors
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

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <system_error>

namespace drsp {

/// Twelve significant digits, '.' separator, independent of the C locale.
/// Negative zero prints as "0".
inline std::string format_number(double value) {
  if (value == 0.0) return "0";
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

/// `value` rounded through its twelve-digit rendering, for serializers that
/// print shortest round-trip representations.
inline double round_to_printed(double value) {
  if (!std::isfinite(value)) return value;
  const std::string s = format_number(value);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

}  // namespace drsp
