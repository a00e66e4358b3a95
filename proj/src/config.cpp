#include "dalab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dalab {

namespace {

enum class Kind { integer, real, real_or_auto, int_or_auto, flag, reals, text };

struct KeySpec {
    const char* name;
    Kind kind;
    const char* value;
};

// Experiment thresholds live here and nowhere else.
const std::vector<KeySpec>& specs() {
    static const std::vector<KeySpec> s = {
        {"a", Kind::integer, "3"},
        {"k", Kind::real_or_auto, "auto"},
        {"rho", Kind::real_or_auto, "auto"},
        {"seed", Kind::integer, "20261014"},
        {"out_dir", Kind::text, ""},
        {"holonomy.step", Kind::real_or_auto, "auto"},
        {"holonomy.event_tol", Kind::real, "1e-13"},
        {"holonomy.n_bundle", Kind::int_or_auto, "auto"},
        {"semiconj.tol", Kind::real, "1e-13"},
        {"minimality.enabled", Kind::flag, "true"},
        {"minimality.N", Kind::integer, "100000"},
        {"minimality.eps", Kind::real, "0.05"},
        {"minimality.starts", Kind::integer, "2"},
        {"sensitivity.enabled", Kind::flag, "true"},
        {"sensitivity.delta", Kind::real, "1e-6"},
        {"sensitivity.N", Kind::integer, "10000"},
        {"sensitivity.pairs", Kind::integer, "100"},
        {"sensitivity.directions_per_base", Kind::integer, "10"},
        {"sensitivity.growth", Kind::real, "1000"},
        {"sensitivity.min_fraction", Kind::real, "0.01"},
        {"sensitivity.neighborhood", Kind::real, "1e-3"},
        {"sensitivity.control_tol", Kind::real, "1e-6"},
        {"li_yorke.enabled", Kind::flag, "true"},
        {"li_yorke.N", Kind::integer, "10000"},
        {"li_yorke.arc_points", Kind::integer, "5"},
        {"li_yorke.eps_low", Kind::real, "1e-3"},
        {"li_yorke.high_fraction", Kind::real, "0.5"},
        {"li_yorke.control_pairs", Kind::integer, "8"},
        {"entropy.enabled", Kind::flag, "true"},
        {"entropy.n_max", Kind::integer, "20"},
        {"entropy.eps", Kind::reals, "0.05,0.1"},
        {"entropy.samples", Kind::integer, "1000"},
        {"entropy.slope_max", Kind::real, "0.05"},
        {"entropy.noise", Kind::real, "0.02"},
        {"ergodicity.enabled", Kind::flag, "true"},
        {"ergodicity.N", Kind::integer, "1000000"},
        {"ergodicity.starts", Kind::integer, "10"},
        {"ergodicity.spread_max", Kind::real, "1e-2"},
        {"rotation.enabled", Kind::flag, "true"},
        {"rotation.N", Kind::integer, "1000000"},
        {"rotation.tol", Kind::real, "1e-3"},
        {"census.enabled", Kind::flag, "true"},
        {"census.samples", Kind::integer, "10000"},
        {"census.N", Kind::integer, "60"},
        {"census.burn", Kind::int_or_auto, "auto"},
        {"census.gamma", Kind::real_or_auto, "auto"},
        {"census.visit_radius", Kind::real, "1"},
        {"census.max_fraction", Kind::real, "0.05"},
        {"census.exponent_tol", Kind::real, "1e-6"},
        {"fiber.probe_N", Kind::integer, "2000"},
    };
    return s;
}

int index_of(const std::string& key) {
    const auto& s = specs();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (key == s[i].name) return static_cast<int>(i);
    return -1;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& v, double& out) {
    std::istringstream in(v);
    in.imbue(std::locale::classic());
    in >> out;
    return in && in.peek() == EOF && std::isfinite(out);
}

bool parse_int(const std::string& v, long& out) {
    if (v.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stol(v, &pos);
    } catch (...) {
        return false;
    }
    return pos == v.size();
}

// Returns an error message or empty.
std::string validate(Kind kind, const std::string& v) {
    double d;
    long l;
    switch (kind) {
        case Kind::integer: return parse_int(v, l) ? "" : "expected an integer";
        case Kind::real: return parse_real(v, d) ? "" : "expected a real number";
        case Kind::real_or_auto: return v == "auto" || parse_real(v, d) ? "" : "expected a real number or 'auto'";
        case Kind::int_or_auto: return v == "auto" || parse_int(v, l) ? "" : "expected an integer or 'auto'";
        case Kind::flag: return v == "true" || v == "false" ? "" : "expected true or false";
        case Kind::reals: {
            std::stringstream ss(v);
            std::string item;
            int n = 0;
            while (std::getline(ss, item, ',')) {
                if (!parse_real(trim(item), d)) return "expected a comma-separated list of reals";
                ++n;
            }
            return n > 0 ? "" : "expected a comma-separated list of reals";
        }
        case Kind::text: return "";
    }
    return "";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems) : problems_(std::move(problems)) {
    message_ = "invalid configuration:";
    for (const auto& p : problems_) message_ += "\n  " + p;
}

RunConfig::RunConfig() {
    for (const auto& s : specs()) values_.emplace_back(s.value);
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& s : specs()) out.emplace_back(s.name);
        return out;
    }();
    return k;
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::vector<std::string> problems;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        int idx = index_of(key);
        if (idx < 0) {
            problems.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            continue;
        }
        if (auto it = seen.find(key); it != seen.end()) {
            problems.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "' (first set on line " +
                               std::to_string(it->second) + ")");
            continue;
        }
        seen[key] = lineno;
        std::string err = validate(specs()[idx].kind, value);
        if (!err.empty()) {
            problems.push_back("line " + std::to_string(lineno) + ": " + key + ": " + err);
            continue;
        }
        cfg.values_[idx] = value;
    }
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::to_text() const {
    std::string out;
    for (std::size_t i = 0; i < values_.size(); ++i) out += std::string(specs()[i].name) + " = " + values_[i] + "\n";
    return out;
}

bool RunConfig::has(const std::string& key) const { return index_of(key) >= 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
    int idx = index_of(key);
    if (idx < 0) throw ConfigError({"unknown key '" + key + "'"});
    std::string err = validate(specs()[idx].kind, value);
    if (!err.empty()) throw ConfigError({key + ": " + err});
    values_[idx] = value;
}

const std::string& RunConfig::raw(const std::string& key) const {
    int idx = index_of(key);
    if (idx < 0) throw ConfigError({"unknown key '" + key + "'"});
    return values_[idx];
}

double RunConfig::real(const std::string& key) const {
    double d = 0.0;
    if (!parse_real(raw(key), d)) throw ConfigError({key + ": not a real number"});
    return d;
}

long RunConfig::integer(const std::string& key) const {
    long l = 0;
    if (!parse_int(raw(key), l)) throw ConfigError({key + ": not an integer"});
    return l;
}

bool RunConfig::flag(const std::string& key) const { return raw(key) == "true"; }

std::vector<double> RunConfig::reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(raw(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        double d = 0.0;
        parse_real(trim(item), d);
        out.push_back(d);
    }
    return out;
}

std::optional<double> RunConfig::real_or_auto(const std::string& key) const {
    if (raw(key) == "auto") return std::nullopt;
    return real(key);
}

}  // namespace dalab
