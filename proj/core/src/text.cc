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

#include "stancebot/text.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace stancebot::text {
namespace {

std::vector<UChar32> decode(std::string_view utf8) {
  std::vector<UChar32> out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? 0xFFFD : c);
  }
  return out;
}

void append(std::string& out, UChar32 c) {
  std::array<uint8_t, U8_MAX_LENGTH> buf{};
  int32_t n = 0;
  U8_APPEND_UNSAFE(buf.data(), n, c);
  out.append(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::size_t>(n));
}

std::string encode(const std::vector<UChar32>& cps, std::size_t begin,
                   std::size_t end, bool fold) {
  std::string out;
  out.reserve((end - begin) * 2);
  for (std::size_t i = begin; i < end; ++i) {
    append(out, fold ? u_foldCase(cps[i], U_FOLD_CASE_DEFAULT) : cps[i]);
  }
  return out;
}

bool is_word(UChar32 c) {
  return c == '_' || u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

bool is_regional_indicator(UChar32 c) { return c >= 0x1F1E6 && c <= 0x1F1FF; }

bool is_emoji_base(UChar32 c) {
  return is_regional_indicator(c) ||
         u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC);
}

bool is_emoji_extender(UChar32 c) {
  return c == 0xFE0F || c == 0xFE0E || c == 0x20E3 ||
         (c >= 0x1F3FB && c <= 0x1F3FF) || (c >= 0xE0020 && c <= 0xE007F);
}

std::size_t emoji_end(const std::vector<UChar32>& cps, std::size_t i) {
  const std::size_t n = cps.size();
  if (is_regional_indicator(cps[i])) {
    return (i + 1 < n && is_regional_indicator(cps[i + 1])) ? i + 2 : i + 1;
  }
  std::size_t j = i + 1;
  while (j < n) {
    if (is_emoji_extender(cps[j])) {
      ++j;
    } else if (cps[j] == 0x200D && j + 1 < n &&
               u_hasBinaryProperty(cps[j + 1], UCHAR_EXTENDED_PICTOGRAPHIC)) {
      j += 2;
    } else {
      break;
    }
  }
  return j;
}

bool starts_with_ci(const std::vector<UChar32>& cps, std::size_t i,
                    std::string_view prefix) {
  if (i + prefix.size() > cps.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (u_tolower(cps[i + k]) != static_cast<UChar32>(prefix[k])) return false;
  }
  return true;
}

bool is_url_start(const std::vector<UChar32>& cps, std::size_t i) {
  return starts_with_ci(cps, i, "http://") ||
         starts_with_ci(cps, i, "https://") || starts_with_ci(cps, i, "www.");
}

constexpr std::array<std::string_view, 40> kTwoLevelSuffixes = {
    "ac.uk",  "co.uk",  "gov.uk", "org.uk", "me.uk",  "com.au", "net.au",
    "org.au", "co.nz",  "co.jp",  "ne.jp",  "or.jp",  "co.kr",  "com.ar",
    "gob.ar", "com.br", "gov.br", "org.br", "com.mx", "gob.mx", "com.co",
    "gov.co", "com.pe", "gob.pe", "com.uy", "com.ve", "com.ec", "gob.ec",
    "com.bo", "com.py", "gob.cl", "com.es", "org.es", "com.cn", "co.in",
    "co.za",  "com.tr", "com.sg", "com.hk", "com.tw"};

std::vector<std::string_view> split_labels(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (start <= host.size()) {
    const std::size_t dot = host.find('.', start);
    const std::size_t end = dot == std::string_view::npos ? host.size() : dot;
    if (end > start) labels.push_back(host.substr(start, end - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return labels;
}

}  // namespace

std::string case_fold(std::string_view utf8) {
  const auto cps = decode(utf8);
  return encode(cps, 0, cps.size(), true);
}

std::vector<std::string> tokenize(std::string_view utf8) {
  std::vector<std::string> tokens;
  const auto cps = decode(utf8);
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    const UChar32 c = cps[i];
    if (u_isUWhiteSpace(c)) {
      ++i;
      continue;
    }
    const bool chunk_start = i == 0 || u_isUWhiteSpace(cps[i - 1]);
    if (chunk_start && is_url_start(cps, i)) {
      std::size_t j = i;
      while (j < n && !u_isUWhiteSpace(cps[j])) ++j;
      if (const auto host = url_host(encode(cps, i, j, false))) {
        tokens.push_back(registrable_domain(*host));
      }
      i = j;
      continue;
    }
    if ((c == '#' || c == '@') && i + 1 < n && is_word(cps[i + 1])) {
      std::size_t j = i + 1;
      while (j < n && is_word(cps[j])) ++j;
      tokens.push_back(encode(cps, i, j, true));
      i = j;
    } else if (is_word(c)) {
      std::size_t j = i;
      while (j < n && is_word(cps[j])) ++j;
      tokens.push_back(encode(cps, i, j, true));
      i = j;
    } else if (is_emoji_base(c)) {
      const std::size_t j = emoji_end(cps, i);
      tokens.push_back(encode(cps, i, j, false));
      i = j;
    } else {
      ++i;
    }
  }
  return tokens;
}

std::optional<std::string> url_host(std::string_view url) {
  std::string_view rest = url;
  if (const auto scheme = rest.find("://"); scheme != std::string_view::npos) {
    rest.remove_prefix(scheme + 3);
  }
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (const auto at = rest.rfind('@'); at != std::string_view::npos) {
    rest.remove_prefix(at + 1);
  }
  rest = rest.substr(0, rest.find(':'));
  while (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  if (rest.empty() || rest.find('.') == std::string_view::npos) {
    return std::nullopt;
  }
  std::string host = case_fold(rest);
  const bool valid = std::all_of(host.begin(), host.end(), [](char ch) {
    const auto u = static_cast<unsigned char>(ch);
    return u >= 0x80 || std::isalnum(u) || ch == '-' || ch == '.';
  });
  if (!valid) return std::nullopt;
  return host;
}

std::string registrable_domain(std::string_view host) {
  const auto labels = split_labels(host);
  if (labels.size() <= 2) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0) out += '.';
      out += labels[i];
    }
    return out;
  }
  const std::size_t n = labels.size();
  const std::string last_two =
      std::string(labels[n - 2]) + "." + std::string(labels[n - 1]);
  const bool two_level =
      std::find(kTwoLevelSuffixes.begin(), kTwoLevelSuffixes.end(),
                last_two) != kTwoLevelSuffixes.end();
  return two_level ? std::string(labels[n - 3]) + "." + last_two : last_two;
}

std::string top_level_domain(std::string_view host) {
  const auto labels = split_labels(host);
  if (labels.empty()) return {};
  return "." + std::string(labels.back());
}

}  // namespace stancebot::text
