#include "udist/csv.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "udist/errors.hpp"

namespace udist {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  require(!header_.empty(), "CSV header must not be empty");
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw PreconditionError("CSV row has " + std::to_string(row.size()) + " fields, schema has " +
                            std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

namespace {

void write_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << '\n';
}

}  // namespace

void CsvTable::write(std::ostream& os) const {
  write_line(os, header_);
  for (const auto& r : rows_) write_line(os, r);
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  write(f);
  if (!f) throw Error("failed writing " + path);
}

}  // namespace udist
