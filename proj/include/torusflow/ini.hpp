#ifndef TORUSFLOW_INI_HPP
#define TORUSFLOW_INI_HPP

#include <map>
#include <string>
#include <vector>

namespace torusflow {

/// Flat INI-style configuration: "key = value" lines, optional [section]
/// headers prefixing keys as "section.key", '#' or ';' comments.
class IniConfig {
public:
    static IniConfig parse_string(const std::string& text);
    static IniConfig parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key,
                           const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const {
        return entries_;
    }
    /// Canonical "key = value" text, sorted by key (hash input).
    std::string canonical_text() const;

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace torusflow

#endif
