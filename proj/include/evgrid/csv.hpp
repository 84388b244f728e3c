#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evgrid::csv {

/// One parsed record with its 1-based line number in the source text.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Splits delimited text into rows. Double-quoted fields may contain
/// commas and doubled quotes. Blank lines are skipped; CRLF is accepted.
std::vector<Row> parse(std::string_view text);

/// Parses a whole field as a finite double; nullopt-like false on failure.
bool parse_double(std::string_view field, double& out);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Fixed-point representation with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// Quotes a field when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

}  // namespace evgrid::csv
