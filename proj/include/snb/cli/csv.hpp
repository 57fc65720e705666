#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace snb::cli {

/// Empty cells (std::monostate) mark holes such as branch asymptotes.
using Cell = std::variant<std::monostate, double, long, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

/// 13 significant digits, C locale. Non-finite values render as "".
[[nodiscard]] std::string format_number(double value);
[[nodiscard]] Cell optional_cell(const std::optional<double>& v);

void write_csv(const CsvTable& table, std::ostream& out);
/// Throws Error(cli, "IOError") if the file cannot be written.
void write_csv(const CsvTable& table, const std::filesystem::path& path);

/// Reads a file produced by write_csv; cells come back as raw strings.
[[nodiscard]] std::vector<std::vector<std::string>> read_csv(std::istream& in);

} // namespace snb::cli
