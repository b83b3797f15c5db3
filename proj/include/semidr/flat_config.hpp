#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace semidr {

/// Flat key/value document in the TOML subset used by the CLI:
///
///     # comment
///     name = "text"
///     count = 300
///     flag = true
///     grid = [-0.1, 0, 0.1]
///     tests = ["MI", "KL"]
///
/// No tables, no nesting, no multi-line values.
class FlatConfig {
public:
    using Value = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;

    static FlatConfig parse(std::string_view text);
    static FlatConfig load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, Value value) { values_[key] = std::move(value); }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;
    /// Raw value, for keys that accept either numbers or strings.
    const Value& get(const std::string& key) const;

    /// Throws ConfigError naming the first key not in `allowed`.
    void require_known(std::span<const std::string_view> allowed) const;

    const std::map<std::string, Value>& values() const noexcept { return values_; }

private:
    std::map<std::string, Value> values_;
};

}  // namespace semidr
