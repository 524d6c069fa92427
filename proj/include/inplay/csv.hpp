#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace inplay::csv {

// Header-indexed table of string cells. Quoted fields with embedded commas
// and doubled quotes are supported; embedded newlines are not.
class Table {
public:
    static Table read(std::istream& in, const std::string& source = "<stream>");
    static Table read_file(const std::string& path);

    std::size_t rows() const { return rows_.size(); }
    bool has_column(std::string_view name) const;
    std::size_t column(std::string_view name) const;  // throws DataError if absent

    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

    // Typed accessors; `row` is used in error messages (1-based data line).
    double as_double(std::size_t row, std::size_t col) const;
    std::optional<double> as_optional_double(std::size_t row, std::size_t col) const;
    long as_long(std::size_t row, std::size_t col) const;
    std::optional<long> as_optional_long(std::size_t row, std::size_t col) const;
    bool as_bool(std::size_t row, std::size_t col) const;

private:
    [[noreturn]] void fail(std::size_t row, std::size_t col, const std::string& why) const;

    std::string source_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> split_line(std::string_view line);

// Shortest representation that round-trips exactly.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);
std::string quote_if_needed(std::string_view field);

}  // namespace inplay::csv
