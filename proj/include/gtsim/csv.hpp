// Copyright 2025 The gtsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gtsim::csv {

// Reals are printed with ten significant digits through one fixed format
// string, so identical values always yield identical bytes.
inline std::string format_real(double value) {
  if (value == 0.0) value = 0.0;  // fold negative zero
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

inline std::string format_int(long long value) { return std::to_string(value); }

// A fixed-width table written as header plus rows, comma separated, one
// line feed per line. Cell values arrive pre-formatted; the table only
// enforces the column arity and owns the byte layout.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw std::invalid_argument("csv: a table needs at least one column");
  }

  Table& add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
      throw std::invalid_argument("csv: row width does not match the declared columns");
    rows_.push_back(std::move(cells));
    return *this;
  }

  std::size_t row_count() const { return rows_.size(); }

  std::string to_string() const {
    std::string out = join(columns_);
    for (const auto& row : rows_) out += join(row);
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("csv: cannot open for writing: " + path);
    const std::string body = to_string();
    file.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!file) throw std::runtime_error("csv: write failed: " + path);
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) line += ',';
      line += cells[i];
    }
    line += '\n';
    return line;
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace gtsim::csv
