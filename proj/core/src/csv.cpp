// SPDX-License-Identifier: Apache-2.0
#include "topoflock/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "topoflock/errors.hpp"

namespace topoflock::csv {

namespace {

bool parse_double(const std::string& field, double& out) {
  if (field.empty()) return false;
  char* end = nullptr;
  out = std::strtod(field.c_str(), &end);
  return end == field.c_str() + field.size();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = line;
      first = false;
      continue;
    }
    Row row;
    bool numeric_started = false;
    for (const std::string& field : split(line)) {
      double v = 0.0;
      if (parse_double(field, v)) {
        row.numbers.push_back(v);
        numeric_started = true;
      } else if (!numeric_started) {
        row.labels.push_back(field);
      } else {
        throw io_error(path + ": non-numeric field after numbers in line '" + line + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (first) throw io_error(path + ": empty file");
  return table;
}

std::pair<std::vector<double>, std::vector<double>> two_columns(const Table& table,
                                                                const std::string& path) {
  std::vector<double> a, b;
  for (const auto& row : table.rows) {
    if (!row.labels.empty() || row.numbers.size() != 2) {
      throw io_error(path + ": expected two numeric columns");
    }
    a.push_back(row.numbers[0]);
    b.push_back(row.numbers[1]);
  }
  return {std::move(a), std::move(b)};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Writer::Writer(std::string path, const std::string& header) : path_(std::move(path)) {
  buffer_ = header;
  buffer_ += '\n';
}

Writer::~Writer() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
      // Errors surface only through an explicit close().
    }
  }
}

void Writer::row(std::initializer_list<double> values) {
  row(std::vector<double>(values));
}

void Writer::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_double(values[i]);
  }
  buffer_ += '\n';
}

void Writer::labeled_row(const std::string& label, std::initializer_list<double> values) {
  buffer_ += label;
  for (double v : values) {
    buffer_ += ',';
    buffer_ += format_double(v);
  }
  buffer_ += '\n';
}

void Writer::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw io_error("cannot write " + path_);
  out << buffer_;
  if (!out) throw io_error("failed writing " + path_);
}

}  // namespace topoflock::csv
