// config.hpp
// Run configuration files: INI-style key = value lines under
// [coupling], [protocol], [noise] and [output]. '#' or ';' start a comment.
// Unknown sections or keys, repeated keys and out-of-range values are
// errors that name the line and the key.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "photonloom/noise_mc.hpp"
#include "photonloom/protocols.hpp"

namespace photonloom {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string key, const std::string& message)
        : std::runtime_error(format(line, key, message)), line_(line), key_(std::move(key)) {}

    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    static std::string format(int line, const std::string& key, const std::string& message) {
        std::string s = line > 0 ? "line " + std::to_string(line) + ": " : "";
        if (!key.empty()) s += "key '" + key + "': ";
        return s + message;
    }

    int line_;
    std::string key_;
};

struct RunConfig {
    ProtocolParams protocol;
    NoiseParams noise;
    std::size_t trials = 100000;
    std::string out;        // CSV destination; empty means a table on stdout
    std::string trial_csv;  // optional per-trial Monte Carlo dump
};

inline DetectorSemantics parse_semantics(const std::string& s) {
    if (s == "exact1" || s == "exactly_one") return DetectorSemantics::exactly_one;
    if (s == "threshold" || s == "at_least_one") return DetectorSemantics::at_least_one;
    throw std::invalid_argument("expected exact1 or threshold, got '" + s + "'");
}

inline std::string semantics_name(DetectorSemantics s) {
    return s == DetectorSemantics::exactly_one ? "exact1" : "threshold";
}

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& v) {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument("not a finite number: '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("not a boolean: '" + v + "'");
}

inline std::uint64_t parse_count(const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw std::invalid_argument("not a non-negative integer: '" + v + "'");
    }
    return std::stoull(v);
}

inline double in_range(double x, double lo, double hi, const char* what) {
    if (!(x >= lo && x <= hi)) {
        std::ostringstream os;
        os << what << " must lie in [" << lo << ", " << hi << "], got " << x;
        throw std::out_of_range(os.str());
    }
    return x;
}

inline double positive(double x) {
    if (!(x > 0)) throw std::out_of_range("must be > 0, got " + std::to_string(x));
    return x;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, RunConfig cfg = {}) {
    using Setter = void (*)(RunConfig&, const std::string&);
    static const std::map<std::string, std::map<std::string, Setter>> keys = {
        {"coupling",
         {
             {"lambda_l", [](RunConfig& c, const std::string& v) { c.protocol.coupling.lambda_l = detail::positive(detail::parse_real(v)); }},
             {"lambda_r", [](RunConfig& c, const std::string& v) { c.protocol.coupling.lambda_r = detail::positive(detail::parse_real(v)); }},
             {"theta", [](RunConfig& c, const std::string& v) { c.protocol.coupling.theta = detail::parse_real(v); }},
         }},
        {"protocol",
         {
             {"variant",
              [](RunConfig& c, const std::string& v) {
                  auto var = parse_variant(v);
                  if (!var) throw std::invalid_argument("unknown variant '" + v + "'");
                  c.protocol.variant = *var;
              }},
             {"semantics", [](RunConfig& c, const std::string& v) { c.protocol.semantics = parse_semantics(v); }},
             {"keep_vacuum_term", [](RunConfig& c, const std::string& v) { c.protocol.keep_vacuum_term = detail::parse_bool(v); }},
             {"bs_transmittance",
              [](RunConfig& c, const std::string& v) {
                  c.protocol.bs_transmittance = detail::in_range(detail::parse_real(v), 0, 1, "bs_transmittance");
              }},
             {"with_f2", [](RunConfig& c, const std::string& v) { c.protocol.with_f2 = detail::parse_bool(v); }},
             {"with_f1_aux", [](RunConfig& c, const std::string& v) { c.protocol.with_f1_aux = detail::parse_bool(v); }},
         }},
        {"noise",
         {
             {"p_excitation", [](RunConfig& c, const std::string& v) { c.noise.p_excitation = detail::in_range(detail::parse_real(v), 0, 1, "p_excitation"); }},
             {"p_collect", [](RunConfig& c, const std::string& v) { c.noise.p_collect = detail::in_range(detail::parse_real(v), 0, 1, "p_collect"); }},
             {"p_detect", [](RunConfig& c, const std::string& v) { c.noise.p_detect = detail::in_range(detail::parse_real(v), 0, 1, "p_detect"); }},
             {"p_window", [](RunConfig& c, const std::string& v) { c.noise.p_window = detail::in_range(detail::parse_real(v), 0, 1, "p_window"); }},
             {"dark_rate",
              [](RunConfig& c, const std::string& v) {
                  double x = detail::parse_real(v);
                  if (x < 0) throw std::out_of_range("dark_rate must be >= 0");
                  c.noise.dark_rate = x;
              }},
             {"seed", [](RunConfig& c, const std::string& v) { c.noise.seed = detail::parse_count(v); }},
             {"trials",
              [](RunConfig& c, const std::string& v) {
                  auto n = detail::parse_count(v);
                  if (n == 0) throw std::out_of_range("trials must be >= 1");
                  c.trials = n;
              }},
         }},
        {"output",
         {
             {"out", [](RunConfig& c, const std::string& v) { c.out = v; }},
             {"trial_csv", [](RunConfig& c, const std::string& v) { c.trial_csv = v; }},
         }},
    };

    std::istringstream is(text);
    std::string raw, section;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = raw;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(lineno, "", "malformed section header '" + line + "'");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!keys.count(section)) throw ConfigError(lineno, "", "unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(lineno, "", "expected 'key = value', got '" + line + "'");
        std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(lineno, "", "missing key");
        if (section.empty()) throw ConfigError(lineno, key, "key outside any section");
        const auto& allowed = keys.at(section);
        auto it = allowed.find(key);
        if (it == allowed.end()) throw ConfigError(lineno, key, "unknown key in [" + section + "]");
        if (!seen.insert(section + "." + key).second) throw ConfigError(lineno, key, "duplicate key");
        try {
            it->second(cfg, value);
        } catch (const std::exception& e) {
            throw ConfigError(lineno, key, e.what());
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(cfg));
}

}  // namespace photonloom
