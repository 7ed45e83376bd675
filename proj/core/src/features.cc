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

#include "stancebot/features.h"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "stancebot/text.h"

namespace stancebot {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw InvalidArgument("triplet (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ") outside " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  std::size_t i = 0;
  std::size_t row = 0;
  while (i < triplets.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      sum += triplets[j].value;
      ++j;
    }
    while (row < triplets[i].row) m.row_ptr_[++row] = m.col_idx_.size();
    if (sum != 0.0) {
      m.col_idx_.push_back(static_cast<std::uint32_t>(triplets[i].col));
      m.values_.push_back(sum);
    }
    i = j;
  }
  while (row < rows) m.row_ptr_[++row] = m.col_idx_.size();
  return m;
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols,
                                      std::span<const double> values) {
  if (values.size() != rows * cols) {
    throw InvalidArgument("dense input size does not match shape");
  }
  SparseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      if (v != 0.0) {
        m.col_idx_.push_back(static_cast<std::uint32_t>(c));
        m.values_.push_back(v);
      }
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

std::span<const std::uint32_t> SparseMatrix::row_columns(std::size_t row) const {
  return std::span(col_idx_).subspan(row_ptr_[row],
                                     row_ptr_[row + 1] - row_ptr_[row]);
}

std::span<const double> SparseMatrix::row_values(std::size_t row) const {
  return std::span(values_).subspan(row_ptr_[row],
                                    row_ptr_[row + 1] - row_ptr_[row]);
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  const auto cols = row_columns(row);
  const auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0.0;
  return row_values(row)[static_cast<std::size_t>(it - cols.begin())];
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> rows) const {
  SparseMatrix m(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto c = row_columns(rows[i]);
    const auto v = row_values(rows[i]);
    m.col_idx_.insert(m.col_idx_.end(), c.begin(), c.end());
    m.values_.insert(m.values_.end(), v.begin(), v.end());
    m.row_ptr_[i + 1] = m.col_idx_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::select_columns(
    std::span<const std::size_t> cols) const {
  constexpr auto kDropped = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(cols_, kDropped);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    remap[cols[j]] = static_cast<std::uint32_t>(j);
  }
  const bool monotone = std::is_sorted(cols.begin(), cols.end());
  SparseMatrix m(rows_, cols.size());
  std::vector<std::pair<std::uint32_t, double>> scratch;
  for (std::size_t r = 0; r < rows_; ++r) {
    scratch.clear();
    const auto c = row_columns(r);
    const auto v = row_values(r);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (remap[c[k]] != kDropped) scratch.emplace_back(remap[c[k]], v[k]);
    }
    if (!monotone) std::sort(scratch.begin(), scratch.end());
    for (const auto& [col, val] : scratch) {
      m.col_idx_.push_back(col);
      m.values_.push_back(val);
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::hconcat(std::span<const SparseMatrix* const> parts) {
  if (parts.empty()) return SparseMatrix{};
  const std::size_t rows = parts.front()->rows();
  std::size_t cols = 0;
  for (const auto* p : parts) {
    if (p->rows() != rows) {
      throw InvalidArgument("hconcat: inconsistent row counts");
    }
    cols += p->cols();
  }
  SparseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t offset = 0;
    for (const auto* p : parts) {
      const auto c = p->row_columns(r);
      const auto v = p->row_values(r);
      for (std::size_t k = 0; k < c.size(); ++k) {
        m.col_idx_.push_back(static_cast<std::uint32_t>(c[k] + offset));
        m.values_.push_back(v[k]);
      }
      offset += p->cols();
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

std::string_view block_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::kAccountTerm:
      return "account_term";
    case BlockKind::kProfileTerm:
      return "profile_term";
    case BlockKind::kProfileDomain:
      return "profile_domain";
    case BlockKind::kAdjRetweet:
      return "adj_retweet";
    case BlockKind::kAdjReply:
      return "adj_reply";
    case BlockKind::kAdjQuote:
      return "adj_quote";
    case BlockKind::kStanceInterRetweet:
      return "stance_inter_retweet";
    case BlockKind::kStanceInterReply:
      return "stance_inter_reply";
    case BlockKind::kStanceInterQuote:
      return "stance_inter_quote";
  }
  return "";
}

BlockKind parse_block_kind(std::string_view name) {
  for (const BlockKind k : kAllBlockKinds) {
    if (block_name(k) == name) return k;
  }
  throw InvalidArgument("unknown feature block '" + std::string(name) + "'");
}

bool is_term_block(BlockKind kind) {
  return kind == BlockKind::kAccountTerm || kind == BlockKind::kProfileTerm;
}

namespace {

TweetKind interaction_kind(BlockKind kind) {
  switch (kind) {
    case BlockKind::kAdjRetweet:
    case BlockKind::kStanceInterRetweet:
      return TweetKind::kRetweet;
    case BlockKind::kAdjReply:
    case BlockKind::kStanceInterReply:
      return TweetKind::kReply;
    default:
      return TweetKind::kQuote;
  }
}

// Turns (row, token) occurrences into a block, keeping tokens used by at
// least `min_df` distinct rows. Columns are sorted by token.
FeatureBlock count_tokens(
    BlockKind kind, const Corpus& corpus,
    std::vector<std::pair<std::uint32_t, std::string>> occurrences,
    std::size_t min_df) {
  std::map<std::string, std::uint32_t> token_ids;
  for (const auto& [row, tok] : occurrences) token_ids.emplace(tok, 0);
  std::vector<std::string> tokens;
  tokens.reserve(token_ids.size());
  for (auto& [tok, id] : token_ids) {
    id = static_cast<std::uint32_t>(tokens.size());
    tokens.push_back(tok);
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(occurrences.size());
  for (const auto& [row, tok] : occurrences) {
    pairs.emplace_back(row, token_ids[tok]);
  }
  std::sort(pairs.begin(), pairs.end());

  std::vector<std::size_t> df(tokens.size(), 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i == 0 || pairs[i] != pairs[i - 1]) ++df[pairs[i].second];
  }
  std::vector<std::int64_t> column(tokens.size(), -1);
  FeatureBlock block;
  block.vocabulary.block = kind;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (df[t] >= min_df) {
      column[t] = static_cast<std::int64_t>(block.vocabulary.tokens.size());
      block.vocabulary.tokens.push_back(tokens[t]);
      block.vocabulary.document_frequency.push_back(df[t]);
    }
  }
  std::vector<Triplet> triplets;
  for (const auto& [row, tok] : pairs) {
    if (column[tok] >= 0) {
      triplets.push_back(
          Triplet{row, static_cast<std::size_t>(column[tok]), 1.0});
    }
  }
  const std::size_t rows = corpus.accounts().size();
  block.matrix = SparseMatrix::from_triplets(rows, block.vocabulary.size(),
                                             std::move(triplets));
  for (const auto& a : corpus.accounts()) block.row_accounts.push_back(a.id);
  return block;
}

}  // namespace

FeatureBlock build_block(const Corpus& corpus, const LabelSet& labels,
                         BlockKind kind, const BlockOptions& options) {
  const auto accounts = corpus.accounts();
  std::vector<std::pair<std::uint32_t, std::string>> occurrences;

  switch (kind) {
    case BlockKind::kAccountTerm: {
      for (const auto& t : corpus.tweets()) {
        const auto row = static_cast<std::uint32_t>(*corpus.account_index(t.author));
        for (auto& tok : text::tokenize(t.text)) {
          occurrences.emplace_back(row, std::move(tok));
        }
      }
      return count_tokens(kind, corpus, std::move(occurrences),
                          options.min_document_frequency);
    }
    case BlockKind::kProfileTerm: {
      for (std::size_t i = 0; i < accounts.size(); ++i) {
        const auto row = static_cast<std::uint32_t>(i);
        for (auto& tok : text::tokenize(accounts[i].full_name)) {
          occurrences.emplace_back(row, std::move(tok));
        }
        for (auto& tok : text::tokenize(accounts[i].bio)) {
          occurrences.emplace_back(row, std::move(tok));
        }
      }
      return count_tokens(kind, corpus, std::move(occurrences),
                          options.min_document_frequency);
    }
    case BlockKind::kProfileDomain: {
      for (std::size_t i = 0; i < accounts.size(); ++i) {
        if (!accounts[i].home_url) continue;
        const auto host = text::url_host(*accounts[i].home_url);
        if (!host) continue;
        const auto row = static_cast<std::uint32_t>(i);
        occurrences.emplace_back(row, text::registrable_domain(*host));
        occurrences.emplace_back(row, text::top_level_domain(*host));
      }
      return count_tokens(kind, corpus, std::move(occurrences),
                          options.min_document_frequency);
    }
    case BlockKind::kAdjRetweet:
    case BlockKind::kAdjReply:
    case BlockKind::kAdjQuote: {
      const TweetKind tk = interaction_kind(kind);
      std::map<AccountId, std::size_t> target_counts;
      for (const auto& t : corpus.tweets()) {
        if (t.kind == tk) ++target_counts[*t.target];
      }
      FeatureBlock block;
      block.vocabulary.block = kind;
      std::map<AccountId, std::size_t> column;
      for (const auto& [target, n] : target_counts) {
        if (n < options.min_target_occurrences) continue;
        column.emplace(target, block.vocabulary.tokens.size());
        block.vocabulary.tokens.push_back(target.str());
        block.vocabulary.document_frequency.push_back(n);
      }
      std::vector<Triplet> triplets;
      for (const auto& t : corpus.tweets()) {
        if (t.kind != tk) continue;
        const auto it = column.find(*t.target);
        if (it == column.end()) continue;
        triplets.push_back(
            Triplet{*corpus.account_index(t.author), it->second, 1.0});
      }
      block.matrix = SparseMatrix::from_triplets(
          accounts.size(), block.vocabulary.size(), std::move(triplets));
      for (const auto& a : accounts) block.row_accounts.push_back(a.id);
      return block;
    }
    case BlockKind::kStanceInterRetweet:
    case BlockKind::kStanceInterReply:
    case BlockKind::kStanceInterQuote: {
      const TweetKind tk = interaction_kind(kind);
      FeatureBlock block;
      block.vocabulary.block = kind;
      block.vocabulary.tokens = {std::string(to_string(Stance::kApruebo)),
                                 std::string(to_string(Stance::kRechazo))};
      std::vector<Triplet> triplets;
      for (const auto& t : corpus.tweets()) {
        if (t.kind != tk) continue;
        const auto it = labels.find(*t.target);
        if (it == labels.end()) continue;
        triplets.push_back(Triplet{*corpus.account_index(t.author),
                                   static_cast<std::size_t>(it->second.stance),
                                   1.0});
      }
      block.matrix = SparseMatrix::from_triplets(accounts.size(), 2,
                                                 std::move(triplets));
      block.vocabulary.document_frequency.assign(2, 0);
      for (std::size_t r = 0; r < block.matrix.rows(); ++r) {
        for (const auto c : block.matrix.row_columns(r)) {
          ++block.vocabulary.document_frequency[c];
        }
      }
      for (const auto& a : accounts) block.row_accounts.push_back(a.id);
      return block;
    }
  }
  throw InvalidArgument("unknown feature block");
}

FeatureMatrix assemble_features(std::span<const FeatureBlock> blocks,
                                const std::set<std::string>& seed_terms) {
  FeatureMatrix out;
  if (blocks.empty()) return out;
  out.row_accounts = blocks.front().row_accounts;
  std::vector<SparseMatrix> kept;
  kept.reserve(blocks.size());
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    if (b.row_accounts != out.row_accounts ||
        b.matrix.rows() != out.row_accounts.size()) {
      throw InvalidArgument("feature block '" +
                            std::string(block_name(b.vocabulary.block)) +
                            "' has a different row order");
    }
    std::vector<std::size_t> cols;
    const std::string prefix = std::string(block_name(b.vocabulary.block)) + ":";
    for (std::size_t c = 0; c < b.vocabulary.size(); ++c) {
      if (is_term_block(b.vocabulary.block) &&
          seed_terms.contains(b.vocabulary.tokens[c])) {
        continue;
      }
      cols.push_back(c);
      out.column_names.push_back(prefix + b.vocabulary.tokens[c]);
    }
    kept.push_back(cols.size() == b.matrix.cols() ? b.matrix
                                                  : b.matrix.select_columns(cols));
    out.blocks.push_back(
        BlockRange{b.vocabulary.block, offset, offset + cols.size()});
    offset += cols.size();
  }
  std::vector<const SparseMatrix*> parts;
  for (const auto& m : kept) parts.push_back(&m);
  out.values = SparseMatrix::hconcat(parts);
  return out;
}

FeatureMatrix build_feature_matrix(const Corpus& corpus, const LabelSet& labels,
                                   const SeedLexicon& lexicon,
                                   const BlockOptions& options) {
  std::vector<FeatureBlock> blocks;
  blocks.reserve(kAllBlockKinds.size());
  for (const BlockKind k : kAllBlockKinds) {
    blocks.push_back(build_block(corpus, labels, k, options));
  }
  return assemble_features(blocks, lexicon.term_set());
}

void write_triplets(const FeatureMatrix& m, std::ostream& out) {
  out << "%%stancebot-triplet 1\n";
  out << "rows " << m.rows() << " cols " << m.cols() << " nnz "
      << m.values.nnz() << " blocks " << m.blocks.size() << '\n';
  for (const auto& b : m.blocks) {
    out << "block " << block_name(b.kind) << ' ' << b.begin << ' ' << b.end
        << '\n';
  }
  for (std::size_t r = 0; r < m.row_accounts.size(); ++r) {
    out << "row " << r << ' ' << m.row_accounts[r].str() << '\n';
  }
  for (std::size_t c = 0; c < m.column_names.size(); ++c) {
    out << "col " << c << ' ' << m.column_names[c] << '\n';
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto cols = m.values.row_columns(r);
    const auto vals = m.values.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << r << ' ' << cols[k] << ' ' << format_double(vals[k]) << '\n';
    }
  }
}

namespace {

[[noreturn]] void bad_triplets(const std::string& what) {
  throw DataError("triplet file: " + what);
}

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) bad_triplets(std::string("missing ") + what);
  return line;
}

}  // namespace

FeatureMatrix read_triplets(std::istream& in) {
  if (expect_line(in, "magic") != "%%stancebot-triplet 1") {
    bad_triplets("bad magic line");
  }
  std::istringstream header(expect_line(in, "shape"));
  std::string k1, k2, k3, k4;
  std::size_t rows = 0, cols = 0, nnz = 0, nblocks = 0;
  if (!(header >> k1 >> rows >> k2 >> cols >> k3 >> nnz >> k4 >> nblocks) ||
      k1 != "rows" || k2 != "cols" || k3 != "nnz" || k4 != "blocks") {
    bad_triplets("bad shape line");
  }
  FeatureMatrix m;
  for (std::size_t i = 0; i < nblocks; ++i) {
    std::istringstream ls(expect_line(in, "block"));
    std::string tag, name;
    BlockRange range;
    if (!(ls >> tag >> name >> range.begin >> range.end) || tag != "block") {
      bad_triplets("bad block line");
    }
    range.kind = parse_block_kind(name);
    m.blocks.push_back(range);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    std::istringstream ls(expect_line(in, "row"));
    std::string tag, id;
    std::size_t index = 0;
    if (!(ls >> tag >> index >> id) || tag != "row" || index != i) {
      bad_triplets("bad row line");
    }
    const auto v = parse_u64(id);
    if (!v) bad_triplets("bad account id '" + id + "'");
    m.row_accounts.emplace_back(*v);
  }
  for (std::size_t i = 0; i < cols; ++i) {
    const std::string line = expect_line(in, "col");
    std::istringstream ls(line);
    std::string tag;
    std::size_t index = 0;
    if (!(ls >> tag >> index) || tag != "col" || index != i) {
      bad_triplets("bad col line");
    }
    const auto sep = line.find(' ', line.find(' ') + 1);
    m.column_names.push_back(sep == std::string::npos ? ""
                                                      : line.substr(sep + 1));
  }
  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  for (std::size_t i = 0; i < nnz; ++i) {
    std::istringstream ls(expect_line(in, "entry"));
    Triplet t;
    if (!(ls >> t.row >> t.col >> t.value)) bad_triplets("bad entry line");
    triplets.push_back(t);
  }
  try {
    m.values = SparseMatrix::from_triplets(rows, cols, std::move(triplets));
  } catch (const InvalidArgument& e) {
    bad_triplets(e.what());
  }
  return m;
}

}  // namespace stancebot
