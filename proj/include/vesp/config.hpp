#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vesp/error.hpp"

namespace vesp {

enum class KeyType { integer, real, boolean, text, real_list, integer_list };

inline std::string type_name(KeyType t) {
    switch (t) {
        case KeyType::integer: return "int";
        case KeyType::real: return "real";
        case KeyType::boolean: return "bool";
        case KeyType::text: return "string";
        case KeyType::real_list: return "real list";
        case KeyType::integer_list: return "int list";
    }
    return "?";
}

struct KeySpec {
    std::string name;
    KeyType type = KeyType::real;
    std::string fallback;  // default, in the text form the parser accepts
    std::string help;
    std::vector<std::string> choices;  // text keys only; empty means free
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

inline bool parse_real(const std::string& v, double& out) {
    if (v.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == v.size() && std::isfinite(out);
}

inline bool parse_int(const std::string& v, std::int64_t& out) {
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    return ec == std::errc{} && p == end && !v.empty();
}

}  // namespace detail

/// Flat, typed key = value document checked against a schema. Lines are
/// `key = value`; `#` starts a comment. Lists are comma separated.
class Config {
public:
    explicit Config(std::vector<KeySpec> schema) : schema_(std::move(schema)) {
        for (const auto& k : schema_) {
            values_[k.name] = k.fallback;
            check(k, k.fallback);
        }
    }

    const std::vector<KeySpec>& schema() const { return schema_; }

    void parse(const std::string& text, const std::string& origin = "config") {
        std::istringstream is(text);
        std::string line;
        std::map<std::string, int> seen;
        for (int lineno = 1; std::getline(is, line); ++lineno) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = detail::trim(line.substr(0, eq));
            if (seen.count(key)) throw ConfigError("duplicate key '" + key + "' in " + origin);
            seen[key] = lineno;
            set(key, detail::trim(line.substr(eq + 1)));
        }
    }

    void load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot read config file " + path);
        std::stringstream ss;
        ss << is.rdbuf();
        parse(ss.str(), path);
    }

    void set(const std::string& key, const std::string& value) {
        check(spec(key), value);
        values_[key] = value;
    }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::int64_t integer(const std::string& key) const {
        std::int64_t v = 0;
        detail::parse_int(raw(key, KeyType::integer), v);
        return v;
    }
    double real(const std::string& key) const {
        double v = 0.0;
        detail::parse_real(raw(key, KeyType::real), v);
        return v;
    }
    bool boolean(const std::string& key) const { return raw(key, KeyType::boolean) == "true"; }
    std::string text(const std::string& key) const { return raw(key, KeyType::text); }
    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : detail::split_list(raw(key, KeyType::real_list))) {
            double v = 0.0;
            detail::parse_real(s, v);
            out.push_back(v);
        }
        return out;
    }
    std::vector<std::int64_t> integers(const std::string& key) const {
        std::vector<std::int64_t> out;
        for (const auto& s : detail::split_list(raw(key, KeyType::integer_list))) {
            std::int64_t v = 0;
            detail::parse_int(s, v);
            out.push_back(v);
        }
        return out;
    }

    /// Resolved document in schema order; parses back to the same values.
    std::string dump() const {
        std::ostringstream os;
        for (const auto& k : schema_) os << k.name << " = " << values_.at(k.name) << "\n";
        return os.str();
    }

    /// Commented schema: every key with its type, default and meaning.
    std::string schema_text(const std::string& title) const {
        std::ostringstream os;
        os << "# " << title << "\n";
        for (const auto& k : schema_) {
            os << "# " << k.help << " [" << type_name(k.type);
            if (!k.choices.empty()) {
                os << ": ";
                for (std::size_t i = 0; i < k.choices.size(); ++i) os << (i ? " | " : "") << k.choices[i];
            }
            os << "]\n" << k.name << " = " << k.fallback << "\n";
        }
        return os.str();
    }

private:
    const KeySpec& spec(const std::string& key) const {
        for (const auto& k : schema_)
            if (k.name == key) return k;
        throw ConfigError("unknown config key '" + key + "'");
    }

    const std::string& raw(const std::string& key, KeyType t) const {
        const KeySpec& k = spec(key);
        require(k.type == t, "config key '" + key + "' is a " + type_name(k.type));
        return values_.at(key);
    }

    static void check(const KeySpec& k, const std::string& v) {
        auto bad = [&](const std::string& why) {
            throw ConfigError("config key '" + k.name + "': " + why + " (got '" + v + "')");
        };
        double r = 0.0;
        std::int64_t i = 0;
        switch (k.type) {
            case KeyType::integer:
                if (!detail::parse_int(v, i)) bad("expected an integer");
                break;
            case KeyType::real:
                if (!detail::parse_real(v, r)) bad("expected a finite real");
                break;
            case KeyType::boolean:
                if (v != "true" && v != "false") bad("expected true or false");
                break;
            case KeyType::text:
                if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end())
                    bad("not one of the allowed values");
                break;
            case KeyType::real_list:
                for (const auto& s : detail::split_list(v))
                    if (!detail::parse_real(s, r)) bad("expected a comma-separated list of reals");
                break;
            case KeyType::integer_list:
                for (const auto& s : detail::split_list(v))
                    if (!detail::parse_int(s, i)) bad("expected a comma-separated list of integers");
                break;
        }
    }

    std::vector<KeySpec> schema_;
    std::map<std::string, std::string> values_;
};

}  // namespace vesp
