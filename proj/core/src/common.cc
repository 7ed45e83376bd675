/*
 * Copyright 2026 The Stancebot Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "stancebot/common.h"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace stancebot {
namespace {

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len,
                 int& out) {
  if (pos + len > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

std::optional<Date> make_date(int y, int m, int d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

}  // namespace

std::optional<std::uint64_t> parse_u64(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<Date> parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!parse_fixed(text, 0, 4, y) || !parse_fixed(text, 5, 2, m) ||
      !parse_fixed(text, 8, 2, d)) {
    return std::nullopt;
  }
  return make_date(y, m, d);
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 10) return std::nullopt;
  const auto date = parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;
  Timestamp ts{*date};
  if (text.size() == 10) return ts;
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') {
    return std::nullopt;
  }
  int hh = 0, mm = 0, ss = 0;
  if (text.size() < 19 || text[13] != ':' || text[16] != ':' ||
      !parse_fixed(text, 11, 2, hh) || !parse_fixed(text, 14, 2, mm) ||
      !parse_fixed(text, 17, 2, ss) || hh > 23 || mm > 59 || ss > 60) {
    return std::nullopt;
  }
  ts += hours{hh} + minutes{mm} + seconds{ss};
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t digits_begin = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == digits_begin) return std::nullopt;
  }
  if (pos == text.size()) return ts;
  const char zone = text[pos];
  if ((zone == 'Z' || zone == 'z') && pos + 1 == text.size()) return ts;
  if (zone == '+' || zone == '-') {
    int oh = 0, om = 0;
    const std::string_view rest = text.substr(pos + 1);
    if (rest.size() == 5 && rest[2] == ':' && parse_fixed(rest, 0, 2, oh) &&
        parse_fixed(rest, 3, 2, om)) {
    } else if (rest.size() == 4 && parse_fixed(rest, 0, 2, oh) &&
               parse_fixed(rest, 2, 2, om)) {
    } else {
      return std::nullopt;
    }
    const seconds offset = hours{oh} + minutes{om};
    return zone == '+' ? ts - offset : ts + offset;
  }
  return std::nullopt;
}

std::string format_date(Date d) {
  using namespace std::chrono;
  const year_month_day ymd{d};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf.data();
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const Date d = day_of(ts);
  const auto secs = (ts - Timestamp{d}).count();
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "T%02lld:%02lld:%02lldZ",
                static_cast<long long>(secs / 3600),
                static_cast<long long>((secs / 60) % 60),
                static_cast<long long>(secs % 60));
  return format_date(d) + buf.data();
}

Date iso_week_start(Date d) {
  using namespace std::chrono;
  const weekday wd{d};
  // iso_encoding: Monday = 1 ... Sunday = 7
  return d - days{wd.iso_encoding() - 1};
}

std::string_view to_string(Stance s) {
  return s == Stance::kApruebo ? "apruebo" : "rechazo";
}

std::optional<Stance> parse_stance(std::string_view text) {
  if (text == "apruebo") return Stance::kApruebo;
  if (text == "rechazo") return Stance::kRechazo;
  return std::nullopt;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name) {
  return derive_seed(master, fnv1a64(stream_name));
}

}  // namespace stancebot
