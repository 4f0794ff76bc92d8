#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "beclab/errors.hpp"
#include "beclab/radial.hpp"

namespace beclab {

/// Flat key tree parsed from an INI/TOML-style file ([section] + key = value)
/// or from JSON (nested objects flattened with '.'), keys like "potential.v0".
class Config {
  public:
    using Value = std::variant<double, bool, std::string, std::vector<double>>;

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigInvalid("cannot open config file " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            return c == '{' ? parse_json(text) : parse_toml(text);
        }
        throw ConfigInvalid("empty config file " + path);
    }

    static Config parse_toml(const std::string& text) {
        Config cfg;
        cfg.source_ = text;
        std::string section;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigInvalid("bad section header at line " + std::to_string(lineno));
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigInvalid("expected key = value at line " + std::to_string(lineno));
            const std::string key = trim(line.substr(0, eq));
            const std::string raw = trim(line.substr(eq + 1));
            if (key.empty() || raw.empty())
                throw ConfigInvalid("empty key or value at line " + std::to_string(lineno));
            cfg.values_[section.empty() ? key : section + "." + key] = parse_scalar(raw, lineno);
        }
        return cfg;
    }

    static Config parse_json(const std::string& text) {
        Config cfg;
        cfg.source_ = text;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const std::exception& e) {
            throw ConfigInvalid(std::string("JSON parse error: ") + e.what());
        }
        flatten(j, "", cfg.values_);
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double number(const std::string& key) const {
        const auto* v = std::get_if<double>(&at(key));
        if (!v) throw ConfigInvalid("key '" + key + "' is not a number");
        return *v;
    }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    std::string str(const std::string& key) const {
        const auto* v = std::get_if<std::string>(&at(key));
        if (!v) throw ConfigInvalid("key '" + key + "' is not a string");
        return *v;
    }
    std::string str_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? str(key) : fallback;
    }
    std::vector<double> numbers(const std::string& key) const {
        if (const auto* v = std::get_if<std::vector<double>>(&at(key))) return *v;
        if (const auto* s = std::get_if<double>(&at(key))) return {*s};
        throw ConfigInvalid("key '" + key + "' is not a number list");
    }

    const std::string& source_text() const { return source_; }

    /// Potential block per the external-interface schema:
    /// {kind: "constant"|"vanishing", v0, R0, n}.
    RadialPotential potential(const std::string& prefix = "potential") const {
        const std::string kind = str_or(prefix + ".kind", "constant");
        const double v0 = number_or(prefix + ".v0", 1.0);
        const double R0 = number_or(prefix + ".R0", 1.0);
        const double n = number_or(prefix + ".n", 0.0);
        if (kind == "constant") return RadialPotential::constant(v0, R0);
        if (kind == "vanishing") return RadialPotential::vanishing(v0, R0, n);
        if (kind == "zero") return RadialPotential::zero(R0);
        throw ConfigInvalid("unknown potential kind '" + kind + "'");
    }

  private:
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static Value parse_scalar(const std::string& raw, int lineno) {
        if (raw.front() == '"') {
            if (raw.size() < 2 || raw.back() != '"')
                throw ConfigInvalid("unterminated string at line " + std::to_string(lineno));
            return raw.substr(1, raw.size() - 2);
        }
        if (raw == "true") return true;
        if (raw == "false") return false;
        if (raw.front() == '[') {
            if (raw.back() != ']')
                throw ConfigInvalid("unterminated array at line " + std::to_string(lineno));
            std::vector<double> items;
            std::string body = raw.substr(1, raw.size() - 2);
            std::istringstream ss(body);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (tok.empty()) continue;
                items.push_back(to_number(tok, lineno));
            }
            return items;
        }
        return to_number(raw, lineno);
    }

    static double to_number(const std::string& s, int lineno) {
        char* end = nullptr;
        const double x = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size())
            throw ConfigInvalid("cannot parse number '" + s + "' at line " +
                                std::to_string(lineno));
        return x;
    }

    static void flatten(const nlohmann::json& j, const std::string& prefix,
                        std::map<std::string, Value>& out) {
        if (j.is_object()) {
            for (const auto& [k, v] : j.items())
                flatten(v, prefix.empty() ? k : prefix + "." + k, out);
        } else if (j.is_number()) {
            out[prefix] = j.get<double>();
        } else if (j.is_boolean()) {
            out[prefix] = j.get<bool>();
        } else if (j.is_string()) {
            out[prefix] = j.get<std::string>();
        } else if (j.is_array()) {
            std::vector<double> items;
            for (const auto& v : j) {
                if (!v.is_number()) throw ConfigInvalid("arrays must be numeric: " + prefix);
                items.push_back(v.get<double>());
            }
            out[prefix] = items;
        } else {
            throw ConfigInvalid("unsupported JSON value at " + prefix);
        }
    }

    const Value& at(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigInvalid("missing config key '" + key + "'");
        return it->second;
    }

    std::map<std::string, Value> values_;
    std::string source_;
};

} // namespace beclab
