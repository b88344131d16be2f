#pragma once

#include <map>
#include <string>
#include <vector>

namespace swarm {

/// Run configuration: "[section]" headers with "key: value" lines, flattened
/// to "section.key". Unknown keys are rejected against a fixed schema;
/// unset keys fall back to schema defaults.
struct RunConfig {
    std::map<std::string, std::string> values;

    static const std::map<std::string, std::string>& schema();
    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);

    /// Sets "section.key=value"; throws ConfigError for unknown keys.
    void set(const std::string& dotted_key, const std::string& value);
    void set_kv(const std::string& assignment); // "section.key=value"

    std::string get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;
};

} // namespace swarm
