#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "sbmri/errors.hpp"

namespace sbmri {

// Plain-text run configuration: `[section]` headers and `key = value` lines.
// '#' starts a comment. Unknown keys are rejected at validation time.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    // Throws ConfigError naming every key in `section` not in `allowed`.
    void validate_keys(const std::string& section, const std::set<std::string>& allowed) const;
    // Throws ConfigError if a section other than the allowed ones is present.
    void validate_sections(const std::set<std::string>& allowed) const;

    // Canonical serialization: sorted sections and keys.
    std::string canonical() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// FNV-1a over the canonical serialization; embedded in every output artifact.
std::uint64_t config_hash(const ConfigFile& cfg);

} // namespace sbmri
