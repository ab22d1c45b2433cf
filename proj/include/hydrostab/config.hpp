#pragma once

/// Flat typed configuration documents.
///
/// Grammar (documented in the README): one `key = value` pair per line;
/// `[section]` headers prefix subsequent keys as "section.key"; `#` starts a
/// comment; strings are double-quoted; numbers are decimal (scientific
/// notation allowed); booleans are true/false; lists are comma-separated.
/// Validation reports every error, not just the first.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hydrostab/errors.hpp"

namespace hydrostab {

struct ConfigIssue {
    int line = 0;
    int col = 0;
    std::string message;
};

std::string format_issues(const std::vector<ConfigIssue>& issues);

struct ConfigEntry {
    std::string raw;  // value text, quotes stripped for strings
    bool quoted = false;
    int line = 0;
    int col = 0;
};

class ConfigDoc {
  public:
    static ConfigDoc parse(const std::string& text);

    const std::vector<ConfigIssue>& parse_issues() const { return issues_; }
    const std::map<std::string, ConfigEntry>& entries() const { return entries_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

  private:
    std::map<std::string, ConfigEntry> entries_;
    std::vector<ConfigIssue> issues_;
};

using ConfigValue = std::variant<double, long, bool, std::string, std::vector<double>>;

class Schema {
  public:
    enum class Type { real, integer, boolean, string, enumeration, real_list };

    Schema& real(const std::string& key, std::optional<double> def = {},
                 double lo = -1e308, double hi = 1e308);
    Schema& integer(const std::string& key, std::optional<long> def = {},
                    long lo = -(1l << 62), long hi = (1l << 62));
    Schema& boolean(const std::string& key, std::optional<bool> def = {});
    Schema& string(const std::string& key, std::optional<std::string> def = {});
    Schema& enumeration(const std::string& key, std::vector<std::string> values,
                        std::optional<std::string> def = {});
    Schema& real_list(const std::string& key, std::optional<std::vector<double>> def = {});
    Schema& required(const std::string& key);

    /// Validates the document; appends all problems to `issues` and returns
    /// the typed values (defaults filled for absent optional keys).
    std::map<std::string, ConfigValue> validate(const ConfigDoc& doc,
                                                std::vector<ConfigIssue>& issues) const;

  private:
    struct Field {
        Type type;
        bool is_required = false;
        std::optional<ConfigValue> def;
        double lo = 0, hi = 0;
        long ilo = 0, ihi = 0;
        std::vector<std::string> enum_values;
    };
    std::map<std::string, Field> fields_;
};

/// Convenience typed accessors.
double cfg_real(const std::map<std::string, ConfigValue>& c, const std::string& k);
long cfg_int(const std::map<std::string, ConfigValue>& c, const std::string& k);
bool cfg_bool(const std::map<std::string, ConfigValue>& c, const std::string& k);
const std::string& cfg_str(const std::map<std::string, ConfigValue>& c, const std::string& k);
const std::vector<double>& cfg_list(const std::map<std::string, ConfigValue>& c,
                                    const std::string& k);

}  // namespace hydrostab
