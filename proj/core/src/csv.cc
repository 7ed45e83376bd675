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

#include "stancebot/csv.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "stancebot/common.h"

namespace stancebot::csv {

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << escape(fields[i]);
  }
  out_ << '\n';
}

namespace {

// Reads one logical record; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  char c = 0;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

Table Table::read(std::istream& in) {
  Table table;
  std::vector<std::string> fields;
  if (!read_record(in, fields)) return table;
  table.header_ = fields;
  for (std::size_t i = 0; i < table.header_.size(); ++i) {
    table.index_.emplace(table.header_[i], i);
  }
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != table.header_.size()) {
      throw DataError("csv: row " + std::to_string(table.rows_.size() + 2) +
                      " has " + std::to_string(fields.size()) +
                      " fields, header has " +
                      std::to_string(table.header_.size()));
    }
    table.rows_.push_back(fields);
  }
  return table;
}

Table Table::read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read(in);
}

std::size_t Table::column(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw DataError("csv: missing column '" + std::string(name) + "'");
  }
  return it->second;
}

}  // namespace stancebot::csv
