#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace mfoe::toml {

// Minimal TOML subset: [tables], key = value with strings, integers, floats,
// booleans, and single-line arrays of those; # comments. Keys are exposed
// flattened as "table.key".
struct Value {
    std::variant<std::string, double, std::int64_t, bool, std::vector<Value>> v;

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_number() const {
        return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
    }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<std::vector<Value>>(v); }
};

class Table {
  public:
    explicit Table(std::map<std::string, Value> values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const;
    double get_number(const std::string& key) const;
    std::int64_t get_integer(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_number_array(const std::string& key) const;
    std::vector<std::string> get_string_array(const std::string& key) const;

    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_number_or(const std::string& key, double fallback) const;
    std::int64_t get_integer_or(const std::string& key, std::int64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    const std::map<std::string, Value>& values() const { return values_; }

  private:
    const Value& require(const std::string& key) const;
    std::map<std::string, Value> values_;
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

} // namespace mfoe::toml
