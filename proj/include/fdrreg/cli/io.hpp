#pragma once

// RFC-4180 CSV reading/writing with locale-independent number formatting.

#include "fdrreg/model_core.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fdrreg::cli {

// Malformed user input; the message names the offending row and column.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::string& path);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest representation that round-trips; "NA" for NaN.
std::string format_double(double v);
double parse_double(std::string_view s);  // throws std::invalid_argument

// Column `z` is mandatory, every other column is a numeric covariate.
// Row numbers in messages count data rows from 1.
TestTable table_from_csv(const CsvTable& csv);
TestTable read_test_table(const std::string& path);

}  // namespace fdrreg::cli
