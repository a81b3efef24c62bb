#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fockforge::toml {

// Parse failure with the 1-based line it occurred on (0 for file-level
// problems such as an unreadable path).
struct ParseError : std::runtime_error {
    int line = 0;
    ParseError(int line_, const std::string& message);
};

// One parsed value. Arrays are single-line and homogeneous; nesting is not
// supported.
struct Value {
    enum class Kind { string, integer, floating, boolean, array };

    Kind kind = Kind::string;
    std::string str;
    std::int64_t integer = 0;
    double floating = 0.0;
    bool boolean = false;
    std::vector<Value> items;
    int line = 0;

    // number regardless of integer/float spelling
    double as_number() const;

    // source-style rendering, used to echo configs into reports
    std::string render() const;
};

// Flat view of a parsed document: keys are "section.key", or the bare key for
// assignments before any [section] header.
struct Table {
    std::map<std::string, Value> values;

    bool has(const std::string& key) const;
    const Value* find(const std::string& key) const;
};

// Supported subset: [section] headers one level deep, key = value pairs,
// basic "strings" (\\ \" \n \t escapes), decimal integers, floats, booleans,
// single-line homogeneous arrays, and # comments. Anything else raises
// ParseError with the offending line number.
Table parse(const std::string& text);
Table parse_file(const std::string& path);

} // namespace fockforge::toml
