#include "snb/cli/csv.hpp"

#include "snb/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace snb::cli {

namespace {

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string render(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) {
        return format_number(*d);
    }
    if (const auto* l = std::get_if<long>(&cell)) {
        return std::to_string(*l);
    }
    if (const auto* s = std::get_if<std::string>(&cell)) {
        return quote_if_needed(*s);
    }
    return {};
}

} // namespace

std::string format_number(double value) {
    if (!std::isfinite(value)) {
        return {};
    }
    if (value == 0.0) {
        return "0";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.13g", value);
    return buf;
}

Cell optional_cell(const std::optional<double>& v) {
    if (!v) {
        return std::monostate{};
    }
    return *v;
}

void write_csv(const CsvTable& table, std::ostream& out) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "," : "") << quote_if_needed(table.header[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << render(row[i]);
        }
        out << '\n';
    }
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        detail::fail(ErrorCategory::cli, "IOError", "cannot open '" + path.string() + "' for writing");
    }
    write_csv(table, out);
    out.flush();
    if (!out) {
        detail::fail(ErrorCategory::cli, "IOError", "write to '" + path.string() + "' failed");
    }
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c = 0;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace snb::cli
