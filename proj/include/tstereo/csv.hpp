#pragma once

// Minimal CSV plumbing shared by the file loaders. Fields are unquoted;
// every format handled here is purely numeric apart from camera names.

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace tstereo::csv {

struct Row {
    std::size_t line = 0;  // 1-based line number in the source file
    std::vector<std::string> fields;
};

/// Reads a header line that must match `expected` exactly, then all
/// non-blank rows. Throws ParseError(source, line) on a header mismatch or a
/// row whose field count differs from the header.
std::vector<Row> read(std::istream& in, std::string_view source, std::string_view expected_header);

/// Throws ParseError on anything that is not a complete finite number.
double to_double(const Row& row, std::size_t column, std::string_view source);
long long to_int(const Row& row, std::size_t column, std::string_view source);

/// Shortest round-trip representation of a double.
std::string format_double(double v);

}  // namespace tstereo::csv
