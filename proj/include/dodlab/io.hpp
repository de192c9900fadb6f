#ifndef DODLAB_IO_HPP_
#define DODLAB_IO_HPP_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dodlab {

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

/// Writes RFC 4180 records with CRLF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);
  std::size_t columns() const { return columns_; }

 private:
  void write(const std::vector<std::string>& fields);

  std::ostream& os_;
  std::size_t columns_;
};

/// Parses RFC 4180 text; accepts LF or CRLF record separators.
std::vector<std::vector<std::string>> read_csv(std::istream& is);

}  // namespace dodlab

#endif  // DODLAB_IO_HPP_
