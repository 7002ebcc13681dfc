#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmpen/dataset.hpp"

namespace mmpen {

/// RFC-4180 table: a header row followed by records of equal width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws InputError naming the column if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Shortest text that round-trips the double exactly.
std::string format_double(double x);

/// Strict numeric parse; empty, NA and non-numeric cells are rejected.
double parse_double(const std::string& cell, std::size_t row, const std::string& column);

struct CsvDataset {
  Dataset data;
  bool mapped_zero_labels = false;  // {0, 1} labels were recoded to {-1, +1}
};

/// All non-response columns become predictors, in file order.
CsvDataset dataset_from_csv(const CsvTable& table, const std::string& response, Task task,
                            bool intercept);
CsvDataset read_dataset(const std::string& path, const std::string& response, Task task,
                        bool intercept);

/// Writes predictors then the response column.
CsvTable dataset_to_csv(const Dataset& data, const std::string& response = "y");

}  // namespace mmpen
