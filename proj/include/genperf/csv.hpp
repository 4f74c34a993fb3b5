#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace genperf {

/// RFC 4180 CSV writer: CRLF-free ("\n" line endings), fields quoted only when they
/// contain a comma, quote or newline.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void row(const std::vector<std::string>& fields);
    const std::string& str() const { return out_; }

private:
    std::size_t width_;
    std::string out_;
};

std::string csv_escape(std::string_view field);

/// Splits CSV text into rows of fields (handles quoted fields).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Shortest round-trip decimal form of a double ("inf", "nan" for non-finite values).
std::string format_double(double v);

/// Fixed-point rendering for human-readable tables.
std::string format_fixed(double v, int decimals);

}  // namespace genperf
