#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <type_traits>
#include <vector>

namespace udist {

// 17 significant digits (round-trips every double).
std::string format_double(double v);

// Quotes a field when it contains a comma, quote, CR or LF; quotes are doubled.
std::string csv_escape(const std::string& field);

// Header plus rows of preformatted fields; LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  // Throws PreconditionError on arity mismatch.
  void add(std::vector<std::string> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

template <class T>
std::string csv_field(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(static_cast<double>(v));
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else {
    return std::string(v);
  }
}

}  // namespace udist
