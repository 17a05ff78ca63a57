#pragma once

#include <string>
#include <vector>

// Small string helpers shared by the manifest, config, and CSV readers.
namespace alertscreen::text {

std::string trim(const std::string& s);
std::string to_lower(std::string s);
std::vector<std::string> split_list(const std::string& s, char sep = ',');
std::string join(const std::vector<std::string>& parts, const std::string& sep);

// RFC 4180 style: double quotes wrap fields, "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line);

// Throws DataError naming `what` when `s` is not a complete number.
double parse_double(const std::string& s, const std::string& what);

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace alertscreen::text
