#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssa {

// INI-style run configuration: "[section]" headers, "key = value" lines,
// '#' comments, and "${VAR}" environment interpolation in values.
class Config {
  public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    // "section.key=value" override, as accepted by the CLI --set flag.
    void set_override(const std::string& dotted_key_equals_value);

    std::optional<std::string> find(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

std::string interpolate_env(const std::string& value);

}  // namespace ssa
