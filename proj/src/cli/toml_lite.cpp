#include "snb/cli/toml_lite.hpp"

#include "snb/error.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>

namespace snb::cli {

namespace {

[[noreturn]] void parse_error(int line, const std::string& msg) {
    detail::fail(ErrorCategory::config, "ParseError", "line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

bool is_bare_key(std::string_view key) {
    if (key.empty()) {
        return false;
    }
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

// Drops a trailing comment, leaving '#' inside strings alone.
std::string_view strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == '\\' && quote == '"') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

double parse_number(std::string_view text, int line) {
    std::string clean;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '_') {
            const bool ok = i > 0 && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                            std::isdigit(static_cast<unsigned char>(text[i + 1]));
            if (!ok) {
                parse_error(line, "misplaced '_' in number '" + std::string(text) + "'");
            }
            continue;
        }
        clean.push_back(text[i]);
    }
    std::string_view body = clean;
    if (!body.empty() && body.front() == '+') {
        body.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc() || ptr != body.data() + body.size() || body.empty() || !std::isfinite(value)) {
        parse_error(line, "invalid value '" + std::string(text) + "'");
    }
    return value;
}

std::string parse_string(std::string_view text, int line) {
    const char quote = text.front();
    if (text.size() < 2 || text.back() != quote) {
        parse_error(line, "unterminated string");
    }
    const std::string_view body = text.substr(1, text.size() - 2);
    if (quote == '\'') {
        return std::string(body);
    }
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '"') {
            parse_error(line, "unexpected '\"' inside string");
        }
        if (body[i] != '\\') {
            out.push_back(body[i]);
            continue;
        }
        if (++i == body.size()) {
            parse_error(line, "dangling escape in string");
        }
        switch (body[i]) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: parse_error(line, std::string("unsupported escape '\\") + body[i] + "'");
        }
    }
    return out;
}

Value parse_value(std::string_view text, int line) {
    text = trim(text);
    if (text.empty()) {
        parse_error(line, "missing value");
    }
    if (text == "true") {
        return true;
    }
    if (text == "false") {
        return false;
    }
    if (text.front() == '"' || text.front() == '\'') {
        return parse_string(text, line);
    }
    if (text.front() == '[') {
        if (text.back() != ']') {
            parse_error(line, "arrays must open and close on one line");
        }
        std::vector<double> items;
        std::string_view body = trim(text.substr(1, text.size() - 2));
        while (!body.empty()) {
            const auto comma = body.find(',');
            const std::string_view item = trim(body.substr(0, comma));
            if (item.empty()) {
                parse_error(line, "empty array element");
            }
            items.push_back(parse_number(item, line));
            if (comma == std::string_view::npos) {
                break;
            }
            body = trim(body.substr(comma + 1));
        }
        return items;
    }
    return parse_number(text, line);
}

} // namespace

Document parse_toml(std::string_view text) {
    Document doc;
    std::string current;
    doc[current];
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::string_view line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                parse_error(line_no, "malformed table header");
            }
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (!is_bare_key(name)) {
                parse_error(line_no, "invalid table name '" + std::string(name) + "'");
            }
            current = std::string(name);
            if (doc.count(current) && current != "") {
                parse_error(line_no, "table [" + current + "] defined twice");
            }
            doc[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            parse_error(line_no, "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (!is_bare_key(key)) {
            parse_error(line_no, "invalid key '" + key + "'");
        }
        Table& table = doc[current];
        if (table.count(key)) {
            parse_error(line_no, "duplicate key '" + key + "'");
        }
        table[key] = Entry{parse_value(line.substr(eq + 1), line_no), line_no};
    }
    return doc;
}

namespace {

Value json_value(const nlohmann::json& j, const std::string& where) {
    if (j.is_boolean()) {
        return j.get<bool>();
    }
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        return j.get<std::string>();
    }
    if (j.is_array()) {
        std::vector<double> items;
        for (const auto& item : j) {
            if (!item.is_number()) {
                detail::fail(ErrorCategory::config, "ParseError", "'" + where + "': arrays must hold numbers");
            }
            items.push_back(item.get<double>());
        }
        return items;
    }
    detail::fail(ErrorCategory::config, "ParseError", "'" + where + "': unsupported JSON value");
}

} // namespace

Document parse_json(std::string_view text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        detail::fail(ErrorCategory::config, "ParseError", e.what());
    }
    if (!root.is_object()) {
        detail::fail(ErrorCategory::config, "ParseError", "top-level JSON value must be an object");
    }
    Document doc;
    doc[""];
    for (const auto& [name, value] : root.items()) {
        if (value.is_object()) {
            Table& table = doc[name];
            for (const auto& [key, inner] : value.items()) {
                table[key] = Entry{json_value(inner, name + "." + key), 0};
            }
        } else {
            doc[""][name] = Entry{json_value(value, name), 0};
        }
    }
    return doc;
}

Document parse_document(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        return parse_json(text);
    }
    return parse_toml(text);
}

} // namespace snb::cli
