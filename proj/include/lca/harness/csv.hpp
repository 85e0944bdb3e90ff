// Copyright 2026 The LCA Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Rectangular numeric tables with a unique header, written as UTF-8 CSV with
// LF line endings and 17 significant digits, so a reload is bit exact.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lca/errors.hpp"

namespace lca::harness {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw DomainError("CsvTable: empty header");
    std::set<std::string> seen;
    for (const auto& h : header_) {
      if (h.empty() || h.find_first_of(",\"\r\n") != std::string::npos)
        throw DomainError("CsvTable: invalid column name '" + h + "'");
      if (!seen.insert(h).second) throw DomainError("CsvTable: duplicate column '" + h + "'");
    }
  }

  void add_row(std::vector<double> row) {
    if (row.size() != header_.size())
      throw DomainError("CsvTable: row has " + std::to_string(row.size()) + " fields, header has " +
                        std::to_string(header_.size()));
    rows_.push_back(std::move(row));
  }
  void add_row(std::initializer_list<double> row) { add_row(std::vector<double>(row)); }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    for (std::size_t j = 0; j < header_.size(); ++j) {
      if (j) out += ',';
      out += header_[j];
    }
    out += '\n';
    for (const auto& r : rows_) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (j) out += ',';
        out += format_number(r[j]);
      }
      out += '\n';
    }
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const std::string s = str();
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace lca::harness
