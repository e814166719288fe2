#include "sbmri/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sbmri {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    bool in_section = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section]; // register even if empty
            in_section = true;
            continue;
        }
        if (!in_section)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": key outside of any section");
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (cfg.sections_[section].count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                              key + "'");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
        throw ConfigError("missing config key [" + section + "] " + key);
    return s->second.at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config key [" + section + "] " + key + ": not a number: " + v);
    return d;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                                 std::int64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    char* end = nullptr;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config key [" + section + "] " + key + ": not an integer: " + v);
    return i;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key [" + section + "] " + key + ": not a boolean: " + v);
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    sections_[section][key] = value;
}

void ConfigFile::validate_keys(const std::string& section,
                               const std::set<std::string>& allowed) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return;
    std::string bad;
    for (const auto& [k, v] : s->second)
        if (!allowed.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    if (!bad.empty())
        throw ConfigError("unknown config key(s) in [" + section + "]: " + bad);
}

void ConfigFile::validate_sections(const std::set<std::string>& allowed) const {
    for (const auto& [name, kv] : sections_)
        if (!allowed.count(name))
            throw ConfigError("unknown config section [" + name + "]");
}

std::string ConfigFile::canonical() const {
    std::ostringstream os;
    for (const auto& [name, kv] : sections_) {
        os << "[" << name << "]\n";
        for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    }
    return os.str();
}

std::uint64_t config_hash(const ConfigFile& cfg) {
    const std::string s = cfg.canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace sbmri
