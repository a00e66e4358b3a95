#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dalab {

// Line-based `key = value` configuration. Every key has a default; values
// are kept as canonical text so a config prints back exactly as parsed.
class RunConfig {
public:
    RunConfig();

    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string to_text() const;

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
    const std::string& raw(const std::string& key) const;

    double real(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    // Empty for `auto`.
    std::optional<double> real_or_auto(const std::string& key) const;

    static const std::vector<std::string>& keys();

    bool operator==(const RunConfig& other) const { return values_ == other.values_; }

private:
    std::vector<std::string> values_;
};

class ConfigError : public std::exception {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const char* what() const noexcept override { return message_.c_str(); }
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
    std::string message_;
};

}  // namespace dalab
