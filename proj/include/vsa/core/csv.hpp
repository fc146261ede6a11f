#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vsa::csv {

// Records never span lines; quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_line(std::string_view line);

std::string escape_field(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

struct Row {
    std::size_t line = 0;  // 1-based line number in the source file
    std::vector<std::string> fields;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;
};

/// Reads a whole CSV file. Throws Error(not_found) if the file cannot be
/// opened and Error(parse) if it is empty (no header line). Blank lines and a
/// UTF-8 byte-order mark are skipped.
Table read_file(const std::filesystem::path& path);

/// Throws Error(parse) unless the header matches `expected` exactly.
void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Strict numeric parsing (whole field must be consumed).
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::string trim(std::string_view text);

/// Pipe-separated multi-valued field; empty text yields an empty list.
std::vector<std::string> split_multi(std::string_view text, char separator = '|');
std::string join_multi(const std::vector<std::string>& items, char separator = '|');

}  // namespace vsa::csv
