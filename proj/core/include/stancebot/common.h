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

#ifndef STANCEBOT_COMMON_H_
#define STANCEBOT_COMMON_H_

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stancebot {

// Base class for every error raised by the library. Callers that only care
// about "the pipeline failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when input data (files, records) violates its documented format.
class DataError : public Error {
 public:
  using Error::Error;
};

// Thrown when an operation is called outside its precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

template <typename Tag>
struct StrongId {
  std::uint64_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint64_t v) : value(v) {}

  friend constexpr auto operator<=>(StrongId, StrongId) = default;
  friend constexpr bool operator==(StrongId, StrongId) = default;

  std::string str() const { return std::to_string(value); }
};

struct AccountTag {};
struct TweetTag {};
using AccountId = StrongId<AccountTag>;
using TweetId = StrongId<TweetTag>;

// Parses a decimal 64-bit id; nullopt on anything else.
std::optional<std::uint64_t> parse_u64(std::string_view text);
// Parses a whole decimal or "nan"/"inf" string; nullopt on anything else.
std::optional<double> parse_double(std::string_view text);

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS", optional fractional seconds,
// and an optional "Z" or "+HH:MM"/"-HH:MM" suffix. Result is UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::optional<Date> parse_date(std::string_view text);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp ts);
// "YYYY-MM-DD"
std::string format_date(Date d);

inline Date day_of(Timestamp ts) {
  return std::chrono::floor<std::chrono::days>(ts);
}

// Monday of the ISO week containing d.
Date iso_week_start(Date d);

// Inclusive day-granularity range.
struct DateWindow {
  Date start;
  Date end;

  bool contains(Date d) const { return start <= d && d <= end; }
  bool contains(Timestamp ts) const { return contains(day_of(ts)); }
  friend bool operator==(const DateWindow&, const DateWindow&) = default;
};

enum class Stance : std::uint8_t { kApruebo = 0, kRechazo = 1 };

std::string_view to_string(Stance s);
std::optional<Stance> parse_stance(std::string_view text);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

// 64-bit FNV-1a, used for stable seeds and config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

// Derives an independent stream seed from a master seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name);

}  // namespace stancebot

template <typename Tag>
struct std::hash<stancebot::StrongId<Tag>> {
  std::size_t operator()(stancebot::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

#endif  // STANCEBOT_COMMON_H_
