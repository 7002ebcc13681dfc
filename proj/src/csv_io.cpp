#include "mmpen/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmpen/errors.hpp"

namespace mmpen {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw InputError("column '" + name + "' not found in CSV header");
}

namespace {

// One record; returns false at end of input. Handles quoted fields with
// embedded separators, doubled quotes and line breaks.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false, was_quoted = false;
  for (;;) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw InputError("CSV: unterminated quoted field starting near line " + std::to_string(line));
      fields.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (!field.empty() || was_quoted) throw InputError("CSV: stray quote on line " + std::to_string(line));
      quoted = was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && in.peek() == '\n') in.get();
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else {
      if (was_quoted) throw InputError("CSV: text after closing quote on line " + std::to_string(line));
      field.push_back(ch);
    }
  }
}

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::size_t line = 1;
  std::vector<std::string> rec;
  if (in.peek() == 0xEF) {  // UTF-8 byte order mark
    char bom[3];
    in.read(bom, 3);
  }
  if (!next_record(in, rec, line) || (rec.size() == 1 && rec[0].empty())) {
    throw InputError("CSV: missing header row");
  }
  t.header = rec;
  while (next_record(in, rec, line)) {
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (rec.size() != t.header.size()) {
      throw InputError("CSV: record ending on line " + std::to_string(line - 1) + " has " +
                       std::to_string(rec.size()) + " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(rec);
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return read_csv(in);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  auto record = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      if (needs_quotes(r[j])) {
        out << '"';
        for (char c : r[j]) out << (c == '"' ? "\"\"" : std::string(1, c));
        out << '"';
      } else {
        out << r[j];
      }
    }
    out << "\r\n";
  };
  record(table.header);
  for (const auto& r : table.rows) record(r);
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  write_csv(out, table);
  if (!out) throw InputError("failed writing '" + path + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
  std::size_t b = 0, e = cell.size();
  while (b < e && (cell[b] == ' ' || cell[b] == '\t')) ++b;
  while (e > b && (cell[e - 1] == ' ' || cell[e - 1] == '\t')) --e;
  const std::string where = " at data row " + std::to_string(row + 1) + ", column '" + column + "'";
  if (b == e) throw InputError("missing value" + where);
  const char* first = cell.data() + b;
  if (*first == '+') ++first;
  double v = 0.0;
  const auto res = std::from_chars(first, cell.data() + e, v);
  if (res.ec != std::errc() || res.ptr != cell.data() + e || !std::isfinite(v)) {
    throw InputError("value '" + cell.substr(b, e - b) + "' is not a finite number" + where);
  }
  return v;
}

CsvDataset dataset_from_csv(const CsvTable& table, const std::string& response, Task task, bool intercept) {
  const std::size_t ycol = table.column(response);
  if (table.rows.empty()) throw InputError("CSV has a header but no data rows");
  CsvDataset out;
  Dataset& d = out.data;
  d.task = task;
  d.intercept = intercept;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(table.header.size() - 1);
  d.x.resize(n, p);
  d.y.resize(n);
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j != ycol) d.names.push_back(table.header[j]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = table.rows[static_cast<std::size_t>(i)];
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double v = parse_double(r[j], static_cast<std::size_t>(i), table.header[j]);
      if (j == ycol) {
        d.y[i] = v;
      } else {
        d.x(i, col++) = v;
      }
    }
  }
  if (task == Task::Classification) {
    bool has_zero = false, has_other = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d.y[i] == 0.0) has_zero = true;
      else if (d.y[i] == -1.0) has_other = true;
      else if (d.y[i] != 1.0) throw InputError("response '" + response + "' has label " + format_double(d.y[i]) +
                                               " at data row " + std::to_string(i + 1) +
                                               "; expected {-1, +1} or {0, 1}");
    }
    if (has_zero && has_other) throw InputError("response '" + response + "' mixes 0 and -1 labels");
    if (has_zero) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d.y[i] == 0.0) d.y[i] = -1.0;
      }
      out.mapped_zero_labels = true;
    }
  }
  d.validate();
  return out;
}

CsvDataset read_dataset(const std::string& path, const std::string& response, Task task, bool intercept) {
  return dataset_from_csv(read_csv_file(path), response, task, intercept);
}

CsvTable dataset_to_csv(const Dataset& data, const std::string& response) {
  CsvTable t;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    t.header.push_back(data.names.empty() ? "x" + std::to_string(j + 1) : data.names[static_cast<std::size_t>(j)]);
  }
  t.header.push_back(response);
  t.rows.reserve(static_cast<std::size_t>(data.n()));
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    std::vector<std::string> r;
    r.reserve(static_cast<std::size_t>(data.p() + 1));
    for (Eigen::Index j = 0; j < data.p(); ++j) r.push_back(format_double(data.x(i, j)));
    r.push_back(format_double(data.y[i]));
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace mmpen
