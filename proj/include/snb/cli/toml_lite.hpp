#pragma once

// Reader for the small configuration language used by snb-lab: a TOML
// subset (tables, `key = value`, numbers, strings, booleans, one-line
// numeric arrays, `#` comments) plus the equivalent JSON object layout.

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace snb::cli {

using Value = std::variant<bool, double, std::string, std::vector<double>>;

struct Entry {
    Value value;
    int line = 0;  ///< 0 for JSON input
};

using Table = std::map<std::string, Entry>;
/// Tables by name; keys outside any table land in "".
using Document = std::map<std::string, Table>;

/// Throws Error(config, "ParseError") with the offending line number.
[[nodiscard]] Document parse_toml(std::string_view text);
/// Top-level object of objects (or scalars for the "" table).
[[nodiscard]] Document parse_json(std::string_view text);

/// JSON when the first non-blank character is '{', TOML otherwise.
[[nodiscard]] Document parse_document(std::string_view text);

} // namespace snb::cli
