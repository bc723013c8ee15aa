#include "pilot/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace pilot {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_number(std::optional<double> x) { return x ? format_number(*x) : std::string(); }

std::string format_integer(std::int64_t x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::meta(std::string_view key, std::string_view value) {
    if (header_written_) throw std::logic_error("CsvWriter: metadata after header row");
    if (value.find_first_of("\r\n") != std::string_view::npos)
        throw std::invalid_argument("CsvWriter: metadata value spans lines");
    out_ << "# " << key << ": " << value << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    if (header_written_) throw std::logic_error("CsvWriter: header written twice");
    header_written_ = true;
    columns_ = columns.size();
    line(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (!header_written_) throw std::logic_error("CsvWriter: row before header");
    if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: row width mismatch");
    line(cells);
    ++rows_;
}

void CsvWriter::line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_escape(cells[i]);
    }
    out_ << '\n';
}

}  // namespace pilot
