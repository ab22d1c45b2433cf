#include "hydrostab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

namespace hydrostab {

std::string format_issues(const std::vector<ConfigIssue>& issues) {
    std::ostringstream os;
    for (const auto& e : issues)
        os << "line " << e.line << ", col " << e.col << ": " << e.message << "\n";
    return os.str();
}

namespace {

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_')) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    return true;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text) {
    ConfigDoc doc;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        // strip comment (not inside quotes)
        bool in_quote = false;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (line[k] == '"') in_quote = !in_quote;
            if (line[k] == '#' && !in_quote) {
                line = line.substr(0, k);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                doc.issues_.push_back({lineno, 1, "unterminated section header"});
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            if (!valid_key(section))
                doc.issues_.push_back({lineno, 1, "invalid section name '" + section + "'"});
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            doc.issues_.push_back({lineno, 1, "expected 'key = value'"});
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!valid_key(key)) {
            doc.issues_.push_back({lineno, 1, "invalid key '" + key + "'"});
            continue;
        }
        if (!section.empty()) key = section + "." + key;
        ConfigEntry entry;
        entry.line = lineno;
        entry.col = static_cast<int>(eq + 2);
        if (!val.empty() && val.front() == '"') {
            if (val.size() < 2 || val.back() != '"') {
                doc.issues_.push_back({lineno, entry.col, "unterminated string for key '" + key + "'"});
                continue;
            }
            entry.raw = val.substr(1, val.size() - 2);
            entry.quoted = true;
        } else {
            entry.raw = val;
        }
        auto [it, inserted] = doc.entries_.emplace(key, entry);
        if (!inserted)
            doc.issues_.push_back({lineno, 1,
                                   "duplicate key '" + key + "' (first defined at line " +
                                       std::to_string(it->second.line) + ")"});
    }
    return doc;
}

Schema& Schema::real(const std::string& key, std::optional<double> def, double lo, double hi) {
    Field f;
    f.type = Type::real;
    f.lo = lo;
    f.hi = hi;
    if (def) f.def = ConfigValue(*def);
    fields_[key] = f;
    return *this;
}

Schema& Schema::integer(const std::string& key, std::optional<long> def, long lo, long hi) {
    Field f;
    f.type = Type::integer;
    f.ilo = lo;
    f.ihi = hi;
    if (def) f.def = ConfigValue(*def);
    fields_[key] = f;
    return *this;
}

Schema& Schema::boolean(const std::string& key, std::optional<bool> def) {
    Field f;
    f.type = Type::boolean;
    if (def) f.def = ConfigValue(*def);
    fields_[key] = f;
    return *this;
}

Schema& Schema::string(const std::string& key, std::optional<std::string> def) {
    Field f;
    f.type = Type::string;
    if (def) f.def = ConfigValue(*def);
    fields_[key] = f;
    return *this;
}

Schema& Schema::enumeration(const std::string& key, std::vector<std::string> values,
                            std::optional<std::string> def) {
    Field f;
    f.type = Type::enumeration;
    f.enum_values = std::move(values);
    if (def) f.def = ConfigValue(*def);
    fields_[key] = f;
    return *this;
}

Schema& Schema::real_list(const std::string& key, std::optional<std::vector<double>> def) {
    Field f;
    f.type = Type::real_list;
    if (def) f.def = ConfigValue(*def);
    fields_[key] = f;
    return *this;
}

Schema& Schema::required(const std::string& key) {
    auto it = fields_.find(key);
    if (it == fields_.end()) throw StructuralError("schema: required() before declaring " + key);
    it->second.is_required = true;
    return *this;
}

namespace {

bool parse_number(const std::string& raw, double& out) {
    if (raw.empty()) return false;
    char* end = nullptr;
    out = std::strtod(raw.c_str(), &end);
    return end == raw.c_str() + raw.size();
}

}  // namespace

std::map<std::string, ConfigValue> Schema::validate(const ConfigDoc& doc,
                                                    std::vector<ConfigIssue>& issues) const {
    std::map<std::string, ConfigValue> out;
    for (const auto& issue : doc.parse_issues()) issues.push_back(issue);

    for (const auto& [key, entry] : doc.entries()) {
        auto it = fields_.find(key);
        if (it == fields_.end()) {
            issues.push_back({entry.line, 1, "unknown key '" + key + "'"});
            continue;
        }
        const Field& f = it->second;
        switch (f.type) {
            case Type::real: {
                double v;
                if (entry.quoted || !parse_number(entry.raw, v)) {
                    issues.push_back({entry.line, entry.col,
                                      "key '" + key + "' expects a number, got '" + entry.raw + "'"});
                    break;
                }
                if (v < f.lo || v > f.hi) {
                    issues.push_back({entry.line, entry.col,
                                      "key '" + key + "' out of range [" + std::to_string(f.lo) +
                                          ", " + std::to_string(f.hi) + "]"});
                    break;
                }
                out[key] = v;
                break;
            }
            case Type::integer: {
                double v;
                if (entry.quoted || !parse_number(entry.raw, v) || v != static_cast<long>(v)) {
                    issues.push_back({entry.line, entry.col,
                                      "key '" + key + "' expects an integer, got '" + entry.raw + "'"});
                    break;
                }
                const long n = static_cast<long>(v);
                if (n < f.ilo || n > f.ihi) {
                    issues.push_back({entry.line, entry.col,
                                      "key '" + key + "' out of range [" + std::to_string(f.ilo) +
                                          ", " + std::to_string(f.ihi) + "]"});
                    break;
                }
                out[key] = n;
                break;
            }
            case Type::boolean: {
                if (entry.raw == "true")
                    out[key] = true;
                else if (entry.raw == "false")
                    out[key] = false;
                else
                    issues.push_back({entry.line, entry.col,
                                      "key '" + key + "' expects true or false"});
                break;
            }
            case Type::string: {
                out[key] = entry.raw;
                break;
            }
            case Type::enumeration: {
                bool ok = false;
                for (const auto& v : f.enum_values) ok = ok || v == entry.raw;
                if (!ok) {
                    std::string opts;
                    for (const auto& v : f.enum_values) opts += (opts.empty() ? "" : "|") + v;
                    issues.push_back({entry.line, entry.col,
                                      "key '" + key + "' must be one of " + opts});
                    break;
                }
                out[key] = entry.raw;
                break;
            }
            case Type::real_list: {
                std::vector<double> vals;
                std::stringstream ss(entry.raw);
                std::string item;
                bool ok = !entry.raw.empty();
                while (std::getline(ss, item, ',')) {
                    double v;
                    std::string t = item;
                    t.erase(0, t.find_first_not_of(" \t"));
                    t.erase(t.find_last_not_of(" \t") + 1);
                    if (!parse_number(t, v)) {
                        ok = false;
                        break;
                    }
                    vals.push_back(v);
                }
                if (!ok) {
                    issues.push_back({entry.line, entry.col,
                                      "key '" + key + "' expects a comma-separated number list"});
                    break;
                }
                out[key] = vals;
                break;
            }
        }
    }

    for (const auto& [key, f] : fields_) {
        if (out.count(key)) continue;
        if (doc.has(key)) continue;  // present but failed to parse; already reported
        if (f.is_required)
            issues.push_back({0, 0, "missing required key '" + key + "'"});
        else if (f.def)
            out[key] = *f.def;
    }
    return out;
}

double cfg_real(const std::map<std::string, ConfigValue>& c, const std::string& k) {
    auto it = c.find(k);
    if (it == c.end()) throw StructuralError("config value missing: " + k);
    if (const double* d = std::get_if<double>(&it->second)) return *d;
    if (const long* n = std::get_if<long>(&it->second)) return static_cast<double>(*n);
    throw StructuralError("config value is not a number: " + k);
}

long cfg_int(const std::map<std::string, ConfigValue>& c, const std::string& k) {
    auto it = c.find(k);
    if (it == c.end()) throw StructuralError("config value missing: " + k);
    return std::get<long>(it->second);
}

bool cfg_bool(const std::map<std::string, ConfigValue>& c, const std::string& k) {
    auto it = c.find(k);
    if (it == c.end()) throw StructuralError("config value missing: " + k);
    return std::get<bool>(it->second);
}

const std::string& cfg_str(const std::map<std::string, ConfigValue>& c, const std::string& k) {
    auto it = c.find(k);
    if (it == c.end()) throw StructuralError("config value missing: " + k);
    return std::get<std::string>(it->second);
}

const std::vector<double>& cfg_list(const std::map<std::string, ConfigValue>& c,
                                    const std::string& k) {
    auto it = c.find(k);
    if (it == c.end()) throw StructuralError("config value missing: " + k);
    return std::get<std::vector<double>>(it->second);
}

}  // namespace hydrostab
