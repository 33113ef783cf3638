// config.hpp - run configuration from command-line flags and a JSON file
//
// Precedence: command-line flag > config-file key > default. Config-file
// keys are the long flag names without the leading dashes.

#pragma once

#include "hyperdistill/states.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperdistill {

enum class OutputFormat { Json, Csv };

struct RunConfig {
    std::size_t pairs = 1000;
    FidelityVector fidelities{0.7, 0.1, 0.1, 0.1};
    double theta = std::numbers::pi / 4;
    double alpha = 1000.0;
    double dephase_p = 0.0;
    double homodyne_error = 0.0;
    double evil_bob_flip_p = 0.0;
    std::uint64_t seed = 0;
    bool entropy = false;
    OutputFormat format = OutputFormat::Json;
    std::optional<std::string> out;
    std::optional<std::string> transcript;
    std::optional<std::size_t> sweep;
    bool allow_audit_fail = false;
    bool timing = false;
    std::optional<std::string> audit_path;
};

// Bad flag or value; `key` names the offending option.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error("--" + key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& s) {
    double x = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(x))
        throw ConfigError(key, "expected a real number, got '" + s + "'");
    return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    std::uint64_t x = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
        throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
    return x;
}

inline double parse_probability(const std::string& key, const std::string& s, bool half_open_half = false) {
    const double p = parse_real(key, s);
    if (half_open_half ? !(p >= 0.0 && p < 0.5) : !(p >= 0.0 && p <= 1.0))
        throw ConfigError(key, std::string("probability out of range ") + (half_open_half ? "[0, 0.5)" : "[0, 1]"));
    return p;
}

inline FidelityVector parse_fidelities(const std::string& key, const std::string& s) {
    std::vector<double> v;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(',', start);
        v.push_back(parse_real(key, s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (v.size() != 4) throw ConfigError(key, "expected four comma-separated values F,F1,F2,F3");
    for (double x : v)
        if (x < 0.0 || x > 1.0) throw ConfigError(key, "each fidelity must lie in [0, 1]");
    try {
        return FidelityVector::normalized(v[0], v[1], v[2], v[3], 1e-9);
    } catch (const std::invalid_argument&) {
        throw ConfigError(key, "fidelities must sum to 1 (within 1e-9)");
    }
}

// JSON value -> the string form the flag parser expects.
inline std::string json_to_flag_value(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(key, "array entries must be numbers");
            if (i) s += ',';
            s += v[i].dump();
        }
        return s;
    }
    throw ConfigError(key, "unsupported value type in config file");
}

inline const std::vector<std::string>& value_keys() {
    static const std::vector<std::string> keys = {"pairs",          "fidelities",      "theta", "alpha",
                                                  "dephase-p",      "homodyne-error",  "evil-bob-flip-p",
                                                  "seed",           "format",          "out",   "transcript",
                                                  "sweep"};
    return keys;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError(key, "expected true or false");
}

}  // namespace detail

// `args` excludes the program name.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"hyperdistill"};
    std::map<std::string, std::string> cli_values;
    for (const auto& key : detail::value_keys()) app.add_option("--" + key, cli_values[key]);
    std::string config_path;
    std::string audit_path;
    app.add_option("--config", config_path);
    app.add_option("--audit", audit_path);
    bool entropy = false, allow_audit_fail = false, timing = false;
    app.add_flag("--entropy", entropy);
    app.add_flag("--allow-audit-fail", allow_audit_fail);
    app.add_flag("--timing", timing);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        for (const auto& a : args) {
            if (a.rfind("--", 0) != 0) continue;
            const std::string name = a.substr(0, a.find('='));
            if (app.get_option_no_throw(name) == nullptr) throw ConfigError(name.substr(2), "unknown flag");
        }
        throw ConfigError("args", e.what());
    }

    std::map<std::string, std::string> merged;
    std::map<std::string, bool> merged_flags = {
        {"entropy", entropy}, {"allow-audit-fail", allow_audit_fail}, {"timing", timing}};
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("config", "cannot open '" + config_path + "'");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config", "malformed JSON in '" + config_path + "': " + e.what());
        }
        if (!doc.is_object()) throw ConfigError("config", "top level of '" + config_path + "' must be an object");
        for (const auto& [k, v] : doc.items()) {
            const auto& keys = detail::value_keys();
            if (std::find(keys.begin(), keys.end(), k) != keys.end()) {
                merged[k] = detail::json_to_flag_value(k, v);
            } else if (merged_flags.contains(k)) {
                const bool on_cli = app.get_option("--" + k)->count() > 0;
                if (!on_cli) merged_flags[k] = detail::parse_bool(k, detail::json_to_flag_value(k, v));
            } else {
                throw ConfigError(k, "unknown key in config file");
            }
        }
    }
    for (const auto& key : detail::value_keys())
        if (app.get_option("--" + key)->count() > 0) merged[key] = cli_values[key];

    RunConfig cfg;
    cfg.entropy = merged_flags["entropy"];
    cfg.allow_audit_fail = merged_flags["allow-audit-fail"];
    cfg.timing = merged_flags["timing"];
    if (!audit_path.empty()) cfg.audit_path = audit_path;

    for (const auto& [key, value] : merged) {
        if (key == "pairs") {
            const auto m = detail::parse_u64(key, value);
            if (m == 0) throw ConfigError(key, "pair count must be at least 1");
            cfg.pairs = static_cast<std::size_t>(m);
        } else if (key == "fidelities") {
            cfg.fidelities = detail::parse_fidelities(key, value);
        } else if (key == "theta") {
            cfg.theta = detail::parse_real(key, value);
            if (!(cfg.theta > 0.0 && cfg.theta <= std::numbers::pi)) throw ConfigError(key, "theta must lie in (0, pi]");
        } else if (key == "alpha") {
            cfg.alpha = detail::parse_real(key, value);
            if (!(cfg.alpha > 0.0)) throw ConfigError(key, "alpha must be positive");
        } else if (key == "dephase-p") {
            cfg.dephase_p = detail::parse_probability(key, value);
        } else if (key == "homodyne-error") {
            cfg.homodyne_error = detail::parse_probability(key, value, true);
        } else if (key == "evil-bob-flip-p") {
            cfg.evil_bob_flip_p = detail::parse_probability(key, value);
        } else if (key == "seed") {
            cfg.seed = detail::parse_u64(key, value);
        } else if (key == "format") {
            if (value == "json") cfg.format = OutputFormat::Json;
            else if (value == "csv") cfg.format = OutputFormat::Csv;
            else throw ConfigError(key, "expected json or csv");
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "transcript") {
            cfg.transcript = value;
        } else if (key == "sweep") {
            const auto n = detail::parse_u64(key, value);
            if (n == 0) throw ConfigError(key, "sweep needs at least one seed");
            cfg.sweep = static_cast<std::size_t>(n);
        }
    }
    return cfg;
}

}  // namespace hyperdistill
