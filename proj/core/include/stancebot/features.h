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

#ifndef STANCEBOT_FEATURES_H_
#define STANCEBOT_FEATURES_H_

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stancebot/common.h"
#include "stancebot/corpus.h"
#include "stancebot/seeding.h"

namespace stancebot {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Compressed sparse row matrix. Column indices within a row are strictly
// increasing; explicit zeros are not stored.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  // Duplicate (row, col) entries are summed; zero results are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  // Row-major dense input; zeros are treated as absent.
  static SparseMatrix from_dense(std::size_t rows, std::size_t cols,
                                 std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_idx_.size(); }

  std::span<const std::uint32_t> row_columns(std::size_t row) const;
  std::span<const double> row_values(std::size_t row) const;
  // Stored value or 0.
  double at(std::size_t row, std::size_t col) const;

  SparseMatrix select_rows(std::span<const std::size_t> rows) const;
  SparseMatrix select_columns(std::span<const std::size_t> cols) const;
  // Horizontal concatenation; all parts must have equal row counts.
  static SparseMatrix hconcat(std::span<const SparseMatrix* const> parts);

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

enum class BlockKind : std::uint8_t {
  kAccountTerm,
  kProfileTerm,
  kProfileDomain,
  kAdjRetweet,
  kAdjReply,
  kAdjQuote,
  kStanceInterRetweet,
  kStanceInterReply,
  kStanceInterQuote,
};

inline constexpr std::array<BlockKind, 9> kAllBlockKinds = {
    BlockKind::kAccountTerm,        BlockKind::kProfileTerm,
    BlockKind::kProfileDomain,      BlockKind::kAdjRetweet,
    BlockKind::kAdjReply,           BlockKind::kAdjQuote,
    BlockKind::kStanceInterRetweet, BlockKind::kStanceInterReply,
    BlockKind::kStanceInterQuote};

std::string_view block_name(BlockKind kind);
// Throws InvalidArgument for unknown names.
BlockKind parse_block_kind(std::string_view name);
bool is_term_block(BlockKind kind);

struct Vocabulary {
  BlockKind block = BlockKind::kAccountTerm;
  std::vector<std::string> tokens;  // column order
  // Accounts using the token (term/domain blocks) or target occurrences
  // (adjacency blocks).
  std::vector<std::size_t> document_frequency;

  std::size_t size() const { return tokens.size(); }
};

struct FeatureBlock {
  Vocabulary vocabulary;
  std::vector<AccountId> row_accounts;
  SparseMatrix matrix;
};

struct BlockOptions {
  // Term and domain tokens used by fewer accounts are dropped.
  std::size_t min_document_frequency = 5;
  // Adjacency columns keep targets reached at least this many times.
  std::size_t min_target_occurrences = 2;
};

// Builds one block with rows in canonical account order (sorted by id).
FeatureBlock build_block(const Corpus& corpus, const LabelSet& labels,
                         BlockKind kind, const BlockOptions& options = {});

struct BlockRange {
  BlockKind kind = BlockKind::kAccountTerm;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

struct FeatureMatrix {
  std::vector<AccountId> row_accounts;
  std::vector<std::string> column_names;  // "block:token"
  std::vector<BlockRange> blocks;
  SparseMatrix values;

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

// Concatenates blocks, dropping term-block columns whose token is a seed
// term. Throws InvalidArgument if the blocks disagree on row order.
FeatureMatrix assemble_features(std::span<const FeatureBlock> blocks,
                                const std::set<std::string>& seed_terms);

// All nine blocks, assembled.
FeatureMatrix build_feature_matrix(const Corpus& corpus, const LabelSet& labels,
                                   const SeedLexicon& lexicon,
                                   const BlockOptions& options = {});

// Sparse triplet text format:
//
//   %%stancebot-triplet 1
//   rows <R> cols <C> nnz <N> blocks <K>
//   block <name> <begin> <end>          (K lines)
//   row <index> <account_id>            (R lines)
//   col <index> <column name>           (C lines)
//   <row> <col> <value>                 (N lines, row-major)
void write_triplets(const FeatureMatrix& matrix, std::ostream& out);
FeatureMatrix read_triplets(std::istream& in);

}  // namespace stancebot

#endif  // STANCEBOT_FEATURES_H_
