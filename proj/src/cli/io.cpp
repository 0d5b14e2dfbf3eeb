#include "fdrreg/cli/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fdrreg::cli {

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (field_started) throw InputError("line " + std::to_string(line) + ": stray quote inside unquoted field");
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_record();
                ++line;
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field.push_back(ch);
                field_started = true;
        }
    }
    if (in_quotes) throw InputError("unterminated quoted field at end of input");
    if (field_started || !field.empty() || !record.empty()) end_record();

    CsvTable out;
    if (records.empty()) throw InputError("input is empty");
    out.header = std::move(records.front());
    out.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return out;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("not a number");
    }
    return v;
}

TestTable table_from_csv(const CsvTable& csv) {
    int zcol = -1;
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
        if (csv.header[j] == "z") {
            if (zcol >= 0) throw InputError("header: column 'z' appears twice");
            zcol = static_cast<int>(j);
        }
    }
    if (zcol < 0) throw InputError("header: missing mandatory column 'z'");
    TestTable t;
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
        if (static_cast<int>(j) != zcol) t.names.push_back(csv.header[j]);
    }
    const auto n = static_cast<Eigen::Index>(csv.rows.size());
    if (n == 0) throw InputError("input has a header but no data rows");
    t.z.resize(csv.rows.size());
    t.X.resize(n, static_cast<Eigen::Index>(t.names.size()));
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        if (row.size() != csv.header.size()) {
            throw InputError("row " + std::to_string(i + 1) + ": expected " + std::to_string(csv.header.size()) +
                             " fields, found " + std::to_string(row.size()));
        }
        Eigen::Index c = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            double v = 0.0;
            try {
                v = parse_double(row[j]);
            } catch (const std::invalid_argument&) {
                throw InputError("row " + std::to_string(i + 1) + ", column '" + csv.header[j] + "': cannot parse '" +
                                 row[j] + "' as a number");
            }
            if (!std::isfinite(v)) {
                throw InputError("row " + std::to_string(i + 1) + ", column '" + csv.header[j] + "': value is not finite");
            }
            if (static_cast<int>(j) == zcol) {
                t.z[i] = v;
            } else {
                t.X(static_cast<Eigen::Index>(i), c++) = v;
            }
        }
    }
    return t;
}

TestTable read_test_table(const std::string& path) { return table_from_csv(read_csv_file(path)); }

}  // namespace fdrreg::cli
