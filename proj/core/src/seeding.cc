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

#include "stancebot/seeding.h"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "stancebot/text.h"

namespace stancebot {

SeedLexicon SeedLexicon::default_lexicon() {
  SeedLexicon lexicon;
  for (const char* t : {"#apruebo", "#yoapruebo", "#votoapruebo"}) {
    lexicon.add(t, Stance::kApruebo);
  }
  for (const char* t : {"#rechazo", "#yorechazo", "#votorechazo"}) {
    lexicon.add(t, Stance::kRechazo);
  }
  return lexicon;
}

void SeedLexicon::add(std::string_view term, Stance stance, unsigned scopes) {
  std::string folded = text::case_fold(term);
  if (folded.empty()) throw InvalidArgument("empty seed term");
  if ((scopes & kScopeAll) == 0) {
    throw InvalidArgument("seed term '" + folded + "' has no scope");
  }
  if (const auto it = index_.find(folded); it != index_.end()) {
    SeedTerm& existing = terms_[it->second];
    if (existing.stance != stance) {
      throw InvalidArgument("seed term '" + folded +
                            "' assigned to both stances");
    }
    existing.scopes |= scopes;
    return;
  }
  index_.emplace(folded, terms_.size());
  terms_.push_back(SeedTerm{std::move(folded), stance, scopes & kScopeAll});
}

std::optional<Stance> SeedLexicon::match(const std::string& token,
                                         TermScope scope) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  const SeedTerm& t = terms_[it->second];
  if ((t.scopes & scope) == 0) return std::nullopt;
  return t.stance;
}

std::set<std::string> SeedLexicon::term_set() const {
  std::set<std::string> out;
  for (const auto& t : terms_) out.insert(t.term);
  return out;
}

std::string_view to_string(LabelSource source) {
  return source == LabelSource::kSeed ? "seed" : "manual";
}

SeedingResult apply_seeds(const Corpus& corpus, const SeedLexicon& lexicon,
                          std::span<const ManualLabel> overrides) {
  // matched[i] bit 0: apruebo, bit 1: rechazo
  std::vector<unsigned> matched(corpus.accounts().size(), 0);
  auto mark = [&](std::size_t row, const std::string& token, TermScope scope) {
    if (const auto s = lexicon.match(token, scope)) {
      matched[row] |= 1u << static_cast<unsigned>(*s);
    }
  };

  const auto accounts = corpus.accounts();
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    for (const auto& tok : text::tokenize(accounts[i].full_name)) {
      mark(i, tok, kScopeProfileName);
    }
    for (const auto& tok : text::tokenize(accounts[i].bio)) {
      mark(i, tok, kScopeBio);
    }
  }
  for (const auto& t : corpus.tweets()) {
    const std::size_t row = *corpus.account_index(t.author);
    for (const auto& tok : text::tokenize(t.text)) {
      mark(row, tok, kScopeContent);
    }
    for (const auto& tag : t.hashtags) {
      std::string folded = text::case_fold(tag);
      if (folded.empty()) continue;
      if (folded.front() != '#') folded.insert(folded.begin(), '#');
      mark(row, folded, kScopeContent);
    }
  }

  SeedingResult result;
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    switch (matched[i]) {
      case 1u:
        result.labels.emplace(accounts[i].id,
                              StanceLabel{Stance::kApruebo, LabelSource::kSeed});
        break;
      case 2u:
        result.labels.emplace(accounts[i].id,
                              StanceLabel{Stance::kRechazo, LabelSource::kSeed});
        break;
      case 3u:
        result.conflicts.push_back(accounts[i].id);
        break;
      default:
        break;
    }
  }
  for (const auto& o : overrides) {
    if (!corpus.find_account(o.account)) {
      result.unknown_overrides.push_back(o.account);
      continue;
    }
    result.labels[o.account] = StanceLabel{o.stance, LabelSource::kManual};
  }
  return result;
}

std::vector<HashtagCount> extract_profile_hashtags(const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& a : corpus.accounts()) {
    auto tokens = text::tokenize(a.full_name);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const auto& tok : tokens) {
      if (tok.size() > 1 && tok.front() == '#') ++counts[tok];
    }
  }
  std::vector<HashtagCount> out;
  out.reserve(counts.size());
  for (auto& [tag, n] : counts) out.push_back(HashtagCount{tag, n});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.accounts != b.accounts ? a.accounts > b.accounts
                                    : a.hashtag < b.hashtag;
  });
  return out;
}

}  // namespace stancebot
