#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace alba::csv {

/// Splits one RFC 4180 record. Quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported. Returns false on an
/// unterminated quote.
bool split_record(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string escape(std::string_view field);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

/// Reads the next line, dropping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

} // namespace alba::csv
