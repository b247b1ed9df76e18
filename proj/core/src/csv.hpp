#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace transitcast::detail {

struct CsvRow {
    std::size_t line{0};
    std::vector<std::string> fields;
};

// Minimal RFC 4180 reader: quoted fields with doubled quotes; no embedded
// newlines. Blank lines are skipped.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}
    std::optional<CsvRow> next();

private:
    std::istream& in_;
    std::size_t line_{0};
};

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_number);

// Strict decimal parse of a whole cell; nullopt on trailing garbage.
std::optional<double> parse_double(std::string_view text);

}  // namespace transitcast::detail
