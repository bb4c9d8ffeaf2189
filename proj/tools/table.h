/*
 * Copyright 2026 The qchannel Authors.
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

#ifndef QCHANNEL_TOOLS_TABLE_H_
#define QCHANNEL_TOOLS_TABLE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qchannel::cli {

// A cell is empty (undefined quantity), an integer or a real.
using Cell = std::variant<std::monostate, std::int64_t, double>;

inline Cell cell(std::optional<double> v) {
  return v ? Cell(*v) : Cell(std::monostate{});
}

class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  // Throws InvalidArgument when the row width does not match the header.
  void add_row(std::vector<Cell> row);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

enum class OutputFormat { kCsv, kJson };

std::string_view to_string(OutputFormat format);
std::optional<OutputFormat> parse_output_format(std::string_view name);

// Reals use 12 significant digits; empty cells are blank in CSV and null in
// JSON. Every CSV line, the last included, ends with '\n'.
std::string format_csv(const Table& table);
std::string format_json(const Table& table);
std::string format_table(const Table& table, OutputFormat format);

// Writes `contents` to a temporary file next to `path`, then renames it over
// `path`; the target never holds a partial file.
void write_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace qchannel::cli

#endif  // QCHANNEL_TOOLS_TABLE_H_
