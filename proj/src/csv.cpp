#include "inplay/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "inplay/error.hpp"

namespace inplay::csv {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

Table Table::read(std::istream& in, const std::string& source) {
    Table t;
    t.source_ = source;
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ": empty file, expected a header line");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header_ = split_line(line);
    for (std::size_t i = 0; i < t.header_.size(); ++i) {
        t.index_.emplace(t.header_[i], i);
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != t.header_.size()) {
            throw DataError(source + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header_.size()) + " fields, found " +
                            std::to_string(fields.size()));
        }
        t.rows_.push_back(std::move(fields));
    }
    return t;
}

Table Table::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read(in, path);
}

bool Table::has_column(std::string_view name) const {
    return index_.find(std::string(name)) != index_.end();
}

std::size_t Table::column(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        throw DataError(source_ + ": missing column '" + std::string(name) + "'");
    }
    return it->second;
}

void Table::fail(std::size_t row, std::size_t col, const std::string& why) const {
    throw DataError(source_ + ": data row " + std::to_string(row + 1) + ", column '" +
                    header_[col] + "': " + why + " ('" + rows_[row][col] + "')");
}

double Table::as_double(std::size_t row, std::size_t col) const {
    auto v = as_optional_double(row, col);
    if (!v) fail(row, col, "missing value");
    return *v;
}

std::optional<double> Table::as_optional_double(std::size_t row, std::size_t col) const {
    const std::string& s = rows_[row][col];
    if (s.empty() || s == "NA") return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(row, col, "not a number");
    return v;
}

long Table::as_long(std::size_t row, std::size_t col) const {
    auto v = as_optional_long(row, col);
    if (!v) fail(row, col, "missing value");
    return *v;
}

std::optional<long> Table::as_optional_long(std::size_t row, std::size_t col) const {
    const std::string& s = rows_[row][col];
    if (s.empty() || s == "NA") return std::nullopt;
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(row, col, "not an integer");
    return v;
}

bool Table::as_bool(std::size_t row, std::size_t col) const {
    const std::string& s = rows_[row][col];
    if (s == "1" || s == "true" || s == "TRUE") return true;
    if (s == "0" || s == "false" || s == "FALSE") return false;
    fail(row, col, "not a boolean");
}

std::string format_double(double x) {
    if (std::isnan(x)) return "NaN";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string format_optional(const std::optional<double>& x) {
    return x ? format_double(*x) : std::string();
}

std::string quote_if_needed(std::string_view field) {
    if (field.find_first_of(",\"") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace inplay::csv
