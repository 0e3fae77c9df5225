#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "amerasian/error.hpp"

namespace amerasian {

inline constexpr const char* kPriceCsvHeader = "product,basis,rho,M,price,std_err,time_s,seed";
inline constexpr const char* kGreeksCsvHeader = "product,M,moneyness,delta,gamma,method";

// Fixed-point text with `decimals` digits; NaN becomes NA and -0 prints as 0.
inline std::string format_fixed(double v, int decimals = 6) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  if (line.find('"') != std::string::npos) throw InputError("quoted CSV fields are not supported");
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (fields[k].find_first_of(",\"\n") != std::string::npos) throw InputError("CSV field contains a separator");
    out << (k ? "," : "") << fields[k];
  }
  out << '\n';
}

inline void write_csv(std::ostream& out, const CsvTable& table) {
  write_csv_row(out, table.header);
  for (const auto& r : table.rows) write_csv_row(out, r);
}

// Reads a header plus rows; every row must have the header's width.
inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InputError("CSV is empty");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size()) throw InputError("CSV row width differs from the header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable parse_csv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

}  // namespace amerasian
