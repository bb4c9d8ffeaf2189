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

#include "table.h"

#include <fstream>
#include <system_error>
#include <unistd.h>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "qchannel/errors.h"

namespace qchannel::cli {

namespace {

std::string format_real(double v) { return fmt::format("{:.12g}", v); }

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return fmt::format("{}", *i);
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  return "";
}

nlohmann::ordered_json json_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  // Round-trip through the CSV text so both formats carry the same value.
  if (const auto* d = std::get_if<double>(&c)) return std::stod(format_real(*d));
  return nullptr;
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  require(row.size() == columns_.size(),
          fmt::format("row has {} cells, header has {}", row.size(), columns_.size()));
  rows_.push_back(std::move(row));
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

std::optional<OutputFormat> parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  return std::nullopt;
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns().size(); ++i) {
    if (i) out += ',';
    out += table.columns()[i];
  }
  out += '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string format_json(const Table& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows()) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns()[i]] = json_cell(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

std::string format_table(const Table& table, OutputFormat format) {
  return format == OutputFormat::kCsv ? format_csv(table) : format_json(table);
}

void write_atomically(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += fmt::format(".tmp.{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error(fmt::format("failed writing {}", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error(fmt::format("cannot move result into {}", path.string()));
  }
}

}  // namespace qchannel::cli
