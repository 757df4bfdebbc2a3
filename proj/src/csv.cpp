#include "tstereo/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

#include "tstereo/errors.hpp"

namespace tstereo::csv {
namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::vector<Row> read(std::istream& in, std::string_view source, std::string_view expected_header) {
    const std::string src(source);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(src, 1, "missing header, expected '" + std::string(expected_header) + "'");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw ParseError(src, line_no, "bad header '" + line + "', expected '" + std::string(expected_header) + "'");
    const std::size_t columns = split(expected_header).size();

    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Row row{line_no, split(line)};
        if (row.fields.size() != columns)
            throw ParseError(src, line_no,
                             fmt::format("expected {} fields, found {}", columns, row.fields.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

double to_double(const Row& row, std::size_t column, std::string_view source) {
    const std::string& s = row.fields.at(column);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
        throw ParseError(std::string(source), row.line, "not a finite number: '" + s + "'");
    return v;
}

long long to_int(const Row& row, std::size_t column, std::string_view source) {
    const std::string& s = row.fields.at(column);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError(std::string(source), row.line, "not an integer: '" + s + "'");
    return v;
}

std::string format_double(double v) { return fmt::format("{}", v); }

}  // namespace tstereo::csv
