#include "fockforge/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fockforge::toml {

ParseError::ParseError(int line_, const std::string& message)
    : std::runtime_error(message +
                         (line_ > 0 ? " (line " + std::to_string(line_) + ")"
                                    : "")),
      line(line_) {}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool bare_key_ok(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
            c != '-')
            return false;
    return true;
}

// strip a trailing comment, honoring quotes
std::string strip_comment(const std::string& s, int line) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    if (in_string) throw ParseError(line, "unterminated string");
    return s;
}

std::string parse_basic_string(const std::string& token, int line) {
    std::string out;
    std::size_t i = 1;
    while (i < token.size() && token[i] != '"') {
        char c = token[i];
        if (c == '\\') {
            ++i;
            if (i >= token.size())
                throw ParseError(line, "dangling escape in string");
            switch (token[i]) {
                case '\\': out += '\\'; break;
                case '"': out += '"'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default:
                    throw ParseError(line, std::string("unsupported escape \\") +
                                               token[i]);
            }
        } else {
            out += c;
        }
        ++i;
    }
    if (i >= token.size()) throw ParseError(line, "unterminated string");
    if (i + 1 != token.size())
        throw ParseError(line, "trailing characters after string");
    return out;
}

bool all_number_chars(const std::string& s) {
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != '+' &&
            c != '-' && c != '.' && c != 'e' && c != 'E')
            return false;
    return !s.empty();
}

Value parse_scalar(const std::string& raw, int line) {
    Value v;
    v.line = line;
    const std::string token = trim(raw);
    if (token.empty()) throw ParseError(line, "missing value");
    if (token.front() == '"') {
        v.kind = Value::Kind::string;
        v.str = parse_basic_string(token, line);
        return v;
    }
    if (token == "true" || token == "false") {
        v.kind = Value::Kind::boolean;
        v.boolean = token == "true";
        return v;
    }
    if (!all_number_chars(token))
        throw ParseError(line, "unrecognized value '" + token + "'");
    // from_chars rejects an explicit plus sign
    const char* begin = token.data();
    if (token.front() == '+') ++begin;
    const char* end = token.data() + token.size();
    if (begin == end) throw ParseError(line, "unrecognized value '" + token + "'");
    {
        std::int64_t n = 0;
        auto [p, ec] = std::from_chars(begin, end, n);
        if (ec == std::errc() && p == token.data() + token.size()) {
            v.kind = Value::Kind::integer;
            v.integer = n;
            v.floating = static_cast<double>(n);
            return v;
        }
        if (ec == std::errc::result_out_of_range &&
            p == token.data() + token.size())
            throw ParseError(line, "integer out of range '" + token + "'");
    }
    {
        double d = 0.0;
        auto [p, ec] = std::from_chars(begin, end, d);
        if (ec == std::errc() && p == end) {
            v.kind = Value::Kind::floating;
            v.floating = d;
            return v;
        }
    }
    throw ParseError(line, "unrecognized value '" + token + "'");
}

Value parse_value(const std::string& raw, int line) {
    const std::string token = trim(raw);
    if (token.empty()) throw ParseError(line, "missing value");
    if (token.front() != '[') return parse_scalar(token, line);

    if (token.back() != ']')
        throw ParseError(line, "array must close on the same line");
    Value v;
    v.kind = Value::Kind::array;
    v.line = line;
    const std::string inner = trim(token.substr(1, token.size() - 2));
    if (inner.empty()) return v;

    std::vector<std::string> parts;
    std::string current;
    bool in_string = false;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        char c = inner[i];
        if (in_string) {
            current += c;
            if (c == '\\' && i + 1 < inner.size()) {
                current += inner[++i];
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
            current += c;
        } else if (c == '[') {
            throw ParseError(line, "nested arrays are not supported");
        } else if (c == ',') {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);

    for (const std::string& part : parts)
        v.items.push_back(parse_scalar(part, line));
    for (const Value& item : v.items) {
        bool numeric_mix = (item.kind == Value::Kind::integer &&
                            v.items.front().kind == Value::Kind::floating) ||
                           (item.kind == Value::Kind::floating &&
                            v.items.front().kind == Value::Kind::integer);
        if (item.kind != v.items.front().kind && !numeric_mix)
            throw ParseError(line, "mixed element types in array");
    }
    return v;
}

std::string render_double(double d) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    std::string out(buf, p);
    // keep floats recognizable as floats
    if (out.find('.') == std::string::npos &&
        out.find('e') == std::string::npos &&
        out.find("inf") == std::string::npos &&
        out.find("nan") == std::string::npos)
        out += ".0";
    return out;
}

} // namespace

double Value::as_number() const {
    if (kind == Kind::integer) return static_cast<double>(integer);
    if (kind == Kind::floating) return floating;
    throw std::logic_error("value is not a number");
}

std::string Value::render() const {
    switch (kind) {
        case Kind::string: {
            std::string out = "\"";
            for (char c : str) {
                if (c == '\\' || c == '"') out += '\\';
                if (c == '\n') {
                    out += "\\n";
                    continue;
                }
                out += c;
            }
            return out + "\"";
        }
        case Kind::integer: return std::to_string(integer);
        case Kind::floating: return render_double(floating);
        case Kind::boolean: return boolean ? "true" : "false";
        case Kind::array: {
            std::string out = "[";
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) out += ", ";
                out += items[i].render();
            }
            return out + "]";
        }
    }
    return "";
}

bool Table::has(const std::string& key) const { return values.count(key) > 0; }

const Value* Table::find(const std::string& key) const {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
}

Table parse(const std::string& text) {
    Table table;
    std::string section;
    std::istringstream in(text);
    std::string raw_line;
    int line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        std::string line = trim(strip_comment(raw_line, line_no));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(line_no, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!bare_key_ok(section))
                throw ParseError(line_no,
                                 "invalid section name '" + section + "'");
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!bare_key_ok(key))
            throw ParseError(line_no, "invalid key '" + key + "'");
        std::string full = section.empty() ? key : section + "." + key;
        if (table.has(full))
            throw ParseError(line_no, "duplicate key '" + full + "'");
        table.values.emplace(full, parse_value(line.substr(eq + 1), line_no));
    }
    return table;
}

Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

} // namespace fockforge::toml
