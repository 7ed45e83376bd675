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

#ifndef STANCEBOT_TEXT_H_
#define STANCEBOT_TEXT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stancebot::text {

// Unicode simple case folding of a UTF-8 string. Invalid sequences are
// replaced by U+FFFD.
std::string case_fold(std::string_view utf8);

// Splits free text into case-folded tokens:
//   - words: runs of letters, digits, marks and '_'
//   - hashtags and mentions keep their leading '#' / '@'
//   - each emoji (including flag pairs, ZWJ sequences and modifiers) is one
//     token
//   - http(s):// and www. URLs become their registrable domain
// Punctuation and whitespace are dropped.
std::vector<std::string> tokenize(std::string_view utf8);

// Host part of a URL ("https://Blog.Example.com:8080/x" -> "blog.example.com").
// Accepts scheme-less "www." forms. nullopt if no host can be found.
std::optional<std::string> url_host(std::string_view url);

// "blog.example.com" -> "example.com"; "news.bbc.co.uk" -> "bbc.co.uk".
// Uses a built-in list of common two-level public suffixes.
std::string registrable_domain(std::string_view host);

// "blog.example.com" -> ".com"
std::string top_level_domain(std::string_view host);

}  // namespace stancebot::text

#endif  // STANCEBOT_TEXT_H_
