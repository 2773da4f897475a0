#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace mabprune {

// Shortest decimal string that parses back to exactly the same double.
std::string double_to_string(double value);

// Full-string parse; nullopt if the text is not a plain decimal number.
std::optional<double> parse_double(const std::string& text);

std::optional<long long> parse_integer(const std::string& text);

// Reads one RFC 4180 record (quoted fields may span lines) and splits it
// into fields. Returns false on end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields);

// Quotes a field only when it needs quoting.
std::string csv_escape(const std::string& field);

std::string join_csv(const std::vector<std::string>& fields);

} // namespace mabprune
