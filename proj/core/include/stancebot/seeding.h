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

#ifndef STANCEBOT_SEEDING_H_
#define STANCEBOT_SEEDING_H_

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stancebot/common.h"
#include "stancebot/corpus.h"

namespace stancebot {

// Where a seed term is looked for.
enum TermScope : unsigned {
  kScopeContent = 1u << 0,
  kScopeProfileName = 1u << 1,
  kScopeBio = 1u << 2,
  kScopeAll = kScopeContent | kScopeProfileName | kScopeBio,
};

struct SeedTerm {
  std::string term;  // case-folded token, e.g. "#apruebo" or "dignidad"
  Stance stance = Stance::kApruebo;
  unsigned scopes = kScopeAll;
};

// Per-stance seed terms. The two stance sets are disjoint.
class SeedLexicon {
 public:
  // #apruebo, #yoapruebo, #votoapruebo and their rechazo counterparts.
  static SeedLexicon default_lexicon();

  // Adds a term (case-folded). Re-adding a term for the same stance merges
  // scopes; adding it for the other stance throws InvalidArgument.
  void add(std::string_view term, Stance stance, unsigned scopes = kScopeAll);

  // Stance of `token` if it is a seed term active in `scope`.
  std::optional<Stance> match(const std::string& token, TermScope scope) const;

  std::span<const SeedTerm> terms() const { return terms_; }
  std::set<std::string> term_set() const;

 private:
  std::vector<SeedTerm> terms_;
  std::map<std::string, std::size_t> index_;
};

enum class LabelSource : std::uint8_t { kSeed, kManual };

std::string_view to_string(LabelSource source);

struct StanceLabel {
  Stance stance = Stance::kApruebo;
  LabelSource source = LabelSource::kSeed;

  friend bool operator==(const StanceLabel&, const StanceLabel&) = default;
};

using LabelSet = std::map<AccountId, StanceLabel>;

struct ManualLabel {
  AccountId account;
  Stance stance = Stance::kApruebo;
};

struct SeedingResult {
  LabelSet labels;
  // Accounts that matched terms of both stances and were left unlabeled.
  std::vector<AccountId> conflicts;
  // Overrides naming accounts absent from the corpus (skipped).
  std::vector<AccountId> unknown_overrides;
};

// Labels accounts whose content (tweet text tokens and hashtags), full name
// or bio contain seed terms of exactly one stance. Matching is exact on
// case-folded tokens. Manual overrides are applied last.
SeedingResult apply_seeds(const Corpus& corpus, const SeedLexicon& lexicon,
                          std::span<const ManualLabel> overrides = {});

struct HashtagCount {
  std::string hashtag;
  std::size_t accounts = 0;

  friend bool operator==(const HashtagCount&, const HashtagCount&) = default;
};

// Hashtags found in profile full names, ranked by distinct accounts
// (descending, then lexicographically).
std::vector<HashtagCount> extract_profile_hashtags(const Corpus& corpus);

}  // namespace stancebot

#endif  // STANCEBOT_SEEDING_H_
