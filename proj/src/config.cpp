#include "ssa/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ssa {
namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

}  // namespace

std::string interpolate_env(const std::string& value) {
    std::string out;
    std::size_t pos = 0;
    while (pos < value.size()) {
        auto start = value.find("${", pos);
        if (start == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        auto end = value.find('}', start);
        if (end == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        out += value.substr(pos, start - pos);
        std::string name = value.substr(start + 2, end - start - 2);
        if (const char* env = std::getenv(name.c_str())) out += env;
        pos = end + 1;
    }
    return out;
}

Config Config::parse(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = interpolate_env(trim(t.substr(eq + 1)));
        config.sections_[section][key] = value;
    }
    return config;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void Config::set_override(const std::string& entry) {
    auto eq = entry.find('=');
    auto dot = entry.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw std::runtime_error("override must look like section.key=value: " + entry);
    sections_[trim(entry.substr(0, dot))][trim(entry.substr(dot + 1, eq - dot - 1))] =
        interpolate_env(trim(entry.substr(eq + 1)));
}

std::optional<std::string> Config::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    return find(section, key).value_or(fallback);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    auto v = find(section, key);
    return v ? std::stod(*v) : fallback;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
    auto v = find(section, key);
    return v ? std::stoll(*v) : fallback;
}

std::vector<std::string> Config::get_list(const std::string& section,
                                          const std::string& key) const {
    std::vector<std::string> items;
    auto v = find(section, key);
    if (!v) return items;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

}  // namespace ssa
