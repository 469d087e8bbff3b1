// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace topoflock::csv {

struct Row {
  std::vector<std::string> labels;  // leading non-numeric fields
  std::vector<double> numbers;
};

struct Table {
  std::string header;
  std::vector<Row> rows;
};

// Reads a CSV file; the first line is kept as the header. Numeric fields are
// parsed as doubles, leading non-numeric fields collect into labels.
Table read(const std::string& path);

// Two named numeric columns of a table; throws io_error when a row does not
// provide both.
std::pair<std::vector<double>, std::vector<double>> two_columns(const Table& table,
                                                                const std::string& path);

// Deterministic CSV writer: doubles are rendered with "%.17g" so identical
// inputs produce byte-identical files. Content is buffered and flushed by
// close().
class Writer {
 public:
  Writer(std::string path, const std::string& header);
  ~Writer();
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  void labeled_row(const std::string& label, std::initializer_list<double> values);
  void close();

 private:
  std::string path_;
  std::string buffer_;
  bool closed_ = false;
};

std::string format_double(double v);

}  // namespace topoflock::csv
