#include "semidr/flat_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "semidr/errors.hpp"

namespace semidr {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::string buf(s);
    buf.erase(std::remove(buf.begin(), buf.end(), '_'), buf.end());
    if (!buf.empty() && buf.front() == '+') buf.erase(buf.begin());
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc() || ptr != buf.data() + buf.size()) return std::nullopt;
    return value;
}

std::optional<std::string> parse_string(std::string_view s) {
    s = trim(s);
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::nullopt;
    s = s.substr(1, s.size() - 2);
    if (s.find('"') != std::string_view::npos) return std::nullopt;
    return std::string(s);
}

std::vector<std::string_view> split_items(std::string_view body) {
    std::vector<std::string_view> items;
    bool quoted = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '"') quoted = !quoted;
        if (body[i] == ',' && !quoted) {
            items.push_back(trim(body.substr(start, i - start)));
            start = i + 1;
        }
    }
    auto last = trim(body.substr(start));
    if (!last.empty()) items.push_back(last);
    return items;
}

FlatConfig::Value parse_value(std::string_view raw, std::size_t line_no) {
    auto fail = [&](const std::string& msg) {
        return ConfigError("line " + std::to_string(line_no) + ": " + msg);
    };
    raw = trim(raw);
    if (raw.empty()) throw fail("missing value");
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '"') {
        if (auto s = parse_string(raw)) return *s;
        throw fail("malformed string");
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') throw fail("unterminated array");
        auto items = split_items(raw.substr(1, raw.size() - 2));
        if (items.empty()) return std::vector<double>{};
        if (items.front().front() == '"') {
            std::vector<std::string> out;
            for (auto item : items) {
                auto s = parse_string(item);
                if (!s) throw fail("mixed or malformed string array");
                out.push_back(*s);
            }
            return out;
        }
        std::vector<double> out;
        for (auto item : items) {
            auto v = parse_number(item);
            if (!v) throw fail("malformed number '" + std::string(item) + "'");
            out.push_back(*v);
        }
        return out;
    }
    if (auto v = parse_number(raw)) return *v;
    throw fail("cannot parse value '" + std::string(raw) + "'");
}

[[noreturn]] void wrong_type(const std::string& key, const char* expected) {
    throw ConfigError("config key '" + key + "' must be " + expected);
}

}  // namespace

FlatConfig FlatConfig::parse(std::string_view text) {
    FlatConfig config;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto eol = text.find('\n');
        auto line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            throw ConfigError("line " + std::to_string(line_no) + ": tables are not supported");
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (config.has(key)) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        config.values_[key] = parse_value(line.substr(eq + 1), line_no);
    }
    return config;
}

FlatConfig FlatConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const FlatConfig::Value& FlatConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

std::string FlatConfig::get_string(const std::string& key) const {
    const auto& v = get(key);
    if (auto s = std::get_if<std::string>(&v)) return *s;
    wrong_type(key, "a string");
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double FlatConfig::get_double(const std::string& key) const {
    const auto& v = get(key);
    if (auto d = std::get_if<double>(&v)) return *d;
    wrong_type(key, "a number");
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long FlatConfig::get_int(const std::string& key) const {
    double d = get_double(key);
    if (std::floor(d) != d || std::abs(d) > 9.0e15) wrong_type(key, "an integer");
    return static_cast<long long>(d);
}

long long FlatConfig::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = get(key);
    if (auto b = std::get_if<bool>(&v)) return *b;
    wrong_type(key, "true or false");
}

std::vector<double> FlatConfig::get_doubles(const std::string& key) const {
    const auto& v = get(key);
    if (auto d = std::get_if<std::vector<double>>(&v)) return *d;
    if (auto d = std::get_if<double>(&v)) return {*d};
    wrong_type(key, "a number or an array of numbers");
}

std::vector<std::string> FlatConfig::get_strings(const std::string& key) const {
    const auto& v = get(key);
    if (auto s = std::get_if<std::vector<std::string>>(&v)) return *s;
    if (auto s = std::get_if<std::string>(&v)) return {*s};
    if (auto d = std::get_if<std::vector<double>>(&v); d && d->empty()) return {};
    wrong_type(key, "a string or an array of strings");
}

void FlatConfig::require_known(std::span<const std::string_view> allowed) const {
    for (const auto& [key, value] : values_) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

}  // namespace semidr
