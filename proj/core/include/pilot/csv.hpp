#pragma once

// Minimal RFC-4180 CSV writer. Lines starting with '#' before the header row
// carry run metadata (parameters, seed, version) and are skipped by readers
// that honour comment lines.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pilot {

/// Shortest decimal string that round-trips to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_number(double x);
std::string format_number(std::optional<double> x);  // empty when absent
std::string format_integer(std::int64_t x);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    /// "# key: value" metadata line. Must precede the header row.
    void meta(std::string_view key, std::string_view value);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

    std::size_t rows() const noexcept { return rows_; }

private:
    void line(const std::vector<std::string>& cells);

    std::ostream& out_;
    std::size_t columns_ = 0;
    std::size_t rows_ = 0;
    bool header_written_ = false;
};

}  // namespace pilot
