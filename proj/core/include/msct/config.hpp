#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace msct {

/**
 * INI-style run configuration ("key = value" under [section] headers).
 * Keys are addressed as "section.key". Every value read through a getter,
 * defaulted or not, is remembered so the resolved parameter set can be
 * written back out as a manifest.
 */
class Config {
public:
    Config() = default;
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;

    /// Record a value that did not come from the file (e.g. a CLI flag).
    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& resolved() const noexcept { return resolved_; }
    /// Resolved values as INI text, grouped by section.
    std::string dump() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, std::string> resolved_;
};

} // namespace msct
