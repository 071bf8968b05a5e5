#include "mfoe/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mfoe/errors.hpp"

namespace mfoe::toml {

namespace {

struct Cursor {
    const std::string& s;
    std::size_t i = 0;
    int line = 1;

    bool done() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    char take() {
        const char c = s[i++];
        if (c == '\n') ++line;
        return c;
    }
    void skip_spaces() {
        while (!done() && (peek() == ' ' || peek() == '\t')) ++i;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("TOML line " + std::to_string(line) + ": " + msg);
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_bare_key(Cursor& c) {
    std::string key;
    while (!c.done() && is_bare_key_char(c.peek())) key.push_back(c.take());
    if (key.empty()) c.fail("expected a key");
    return key;
}

std::string parse_basic_string(Cursor& c) {
    if (c.take() != '"') c.fail("expected '\"'");
    std::string out;
    while (true) {
        if (c.done()) c.fail("unterminated string");
        const char ch = c.take();
        if (ch == '"') break;
        if (ch == '\n') c.fail("newline inside string");
        if (ch == '\\') {
            if (c.done()) c.fail("dangling escape");
            const char esc = c.take();
            switch (esc) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: c.fail(std::string("unsupported escape \\") + esc);
            }
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
    if (c.take() != '[') c.fail("expected '['");
    std::vector<Value> items;
    c.skip_spaces();
    if (!c.done() && c.peek() == ']') {
        c.take();
        return Value{std::move(items)};
    }
    while (true) {
        c.skip_spaces();
        items.push_back(parse_value(c));
        c.skip_spaces();
        if (c.done()) c.fail("unterminated array");
        const char ch = c.take();
        if (ch == ']') break;
        if (ch != ',') c.fail("expected ',' or ']' in array");
    }
    return Value{std::move(items)};
}

Value parse_scalar(Cursor& c) {
    std::string tok;
    while (!c.done()) {
        const char ch = c.peek();
        if (ch == ',' || ch == ']' || ch == '#' || ch == '\n' || ch == ' ' || ch == '\t' ||
            ch == '\r')
            break;
        tok.push_back(c.take());
    }
    if (tok.empty()) c.fail("expected a value");
    if (tok == "true") return Value{true};
    if (tok == "false") return Value{false};

    // integer first, then float
    {
        std::int64_t iv = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
        if (ec == std::errc() && p == tok.data() + tok.size()) return Value{iv};
    }
    {
        double dv = 0.0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
        if (ec == std::errc() && p == tok.data() + tok.size()) return Value{dv};
    }
    c.fail("cannot parse value \"" + tok + "\" (quote strings)");
}

Value parse_value(Cursor& c) {
    if (c.done()) c.fail("expected a value");
    const char ch = c.peek();
    if (ch == '"') return Value{parse_basic_string(c)};
    if (ch == '[') return parse_array(c);
    return parse_scalar(c);
}

void skip_to_eol(Cursor& c, const char* context) {
    c.skip_spaces();
    if (c.done()) return;
    if (c.peek() == '#') {
        while (!c.done() && c.peek() != '\n') c.take();
    }
    if (!c.done() && c.peek() == '\r') c.take();
    if (!c.done()) {
        if (c.peek() != '\n') c.fail(std::string("unexpected trailing characters after ") + context);
        c.take();
    }
}

} // namespace

Table parse(const std::string& text) {
    std::map<std::string, Value> values;
    Cursor c{text};
    std::string section;

    while (!c.done()) {
        c.skip_spaces();
        if (c.done()) break;
        const char ch = c.peek();
        if (ch == '\n' || ch == '\r') {
            c.take();
            continue;
        }
        if (ch == '#') {
            skip_to_eol(c, "comment");
            continue;
        }
        if (ch == '[') {
            c.take();
            c.skip_spaces();
            std::string name = parse_bare_key(c);
            while (!c.done() && c.peek() == '.') {
                c.take();
                name += '.' + parse_bare_key(c);
            }
            c.skip_spaces();
            if (c.done() || c.take() != ']') c.fail("unterminated table header");
            section = name;
            skip_to_eol(c, "table header");
            continue;
        }
        std::string key = ch == '"' ? parse_basic_string(c) : parse_bare_key(c);
        c.skip_spaces();
        if (c.done() || c.take() != '=') c.fail("expected '=' after key \"" + key + "\"");
        c.skip_spaces();
        Value v = parse_value(c);
        const std::string full = section.empty() ? key : section + '.' + key;
        if (values.count(full)) c.fail("duplicate key \"" + full + "\"");
        values.emplace(full, std::move(v));
        skip_to_eol(c, ("value of \"" + full + "\"").c_str());
    }
    return Table(std::move(values));
}

Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const Value& Table::require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key \"" + key + "\"");
    return it->second;
}

std::string Table::get_string(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_string()) throw ConfigError("config key \"" + key + "\" must be a string");
    return std::get<std::string>(v.v);
}

double Table::get_number(const std::string& key) const {
    const Value& v = require(key);
    if (std::holds_alternative<double>(v.v)) return std::get<double>(v.v);
    if (std::holds_alternative<std::int64_t>(v.v))
        return static_cast<double>(std::get<std::int64_t>(v.v));
    throw ConfigError("config key \"" + key + "\" must be a number");
}

std::int64_t Table::get_integer(const std::string& key) const {
    const Value& v = require(key);
    if (!std::holds_alternative<std::int64_t>(v.v))
        throw ConfigError("config key \"" + key + "\" must be an integer");
    return std::get<std::int64_t>(v.v);
}

bool Table::get_bool(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_bool()) throw ConfigError("config key \"" + key + "\" must be a boolean");
    return std::get<bool>(v.v);
}

std::vector<double> Table::get_number_array(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_array()) throw ConfigError("config key \"" + key + "\" must be an array");
    std::vector<double> out;
    for (const Value& e : std::get<std::vector<Value>>(v.v)) {
        if (std::holds_alternative<double>(e.v))
            out.push_back(std::get<double>(e.v));
        else if (std::holds_alternative<std::int64_t>(e.v))
            out.push_back(static_cast<double>(std::get<std::int64_t>(e.v)));
        else
            throw ConfigError("config key \"" + key + "\" must contain numbers");
    }
    return out;
}

std::vector<std::string> Table::get_string_array(const std::string& key) const {
    const Value& v = require(key);
    if (!v.is_array()) throw ConfigError("config key \"" + key + "\" must be an array");
    std::vector<std::string> out;
    for (const Value& e : std::get<std::vector<Value>>(v.v)) {
        if (!e.is_string())
            throw ConfigError("config key \"" + key + "\" must contain strings");
        out.push_back(std::get<std::string>(e.v));
    }
    return out;
}

std::string Table::get_string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Table::get_number_or(const std::string& key, double fallback) const {
    return has(key) ? get_number(key) : fallback;
}

std::int64_t Table::get_integer_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_integer(key) : fallback;
}

bool Table::get_bool_or(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

} // namespace mfoe::toml
