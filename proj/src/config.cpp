#include "mor/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mor {

namespace {

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& what) {
    throw std::runtime_error("config: [" + section + "] " + key + ": " + what);
}

} // namespace

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
    auto& sec = sections_[section];
    if (sec.count(key)) fail(section, key, "duplicate key");
    sec[key] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sec = sections_.find(section);
    return sec != sections_.end() && sec->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    const auto sec = sections_.find(section);
    if (sec == sections_.end() || !sec->second.count(key))
        fail(section, key, "missing required key");
    return sec->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const std::string text = get(section, key);
    std::istringstream in(text);
    double value;
    if (!(in >> value) || !(in >> std::ws).eof())
        fail(section, key, "expected a real number, got '" + text + "'");
    return value;
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_int(const std::string& section, const std::string& key) const {
    const std::string text = get(section, key);
    std::istringstream in(text);
    long value;
    if (!(in >> value) || !(in >> std::ws).eof())
        fail(section, key, "expected an integer, got '" + text + "'");
    return value;
}

long Config::get_int_or(const std::string& section, const std::string& key,
                        long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string text = get(section, key);
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    fail(section, key, "expected a boolean, got '" + text + "'");
}

std::vector<double> Config::get_double_list(const std::string& section,
                                            const std::string& key) const {
    const std::string text = get(section, key);
    std::istringstream in(text);
    std::string first;
    in >> first;
    if (first == "logspace") {
        double lo, hi;
        long count;
        if (!(in >> lo >> hi >> count) || !(in >> std::ws).eof())
            fail(section, key, "logspace wants: logspace <from> <to> <count>");
        if (!(lo > 0.0) || !(hi > lo) || count < 2)
            fail(section, key, "logspace wants 0 < from < to and count >= 2");
        std::vector<double> values(static_cast<std::size_t>(count));
        const double step = (std::log10(hi) - std::log10(lo)) / static_cast<double>(count - 1);
        for (long i = 0; i < count; ++i)
            values[static_cast<std::size_t>(i)] =
                std::pow(10.0, std::log10(lo) + step * static_cast<double>(i));
        return values;
    }

    std::istringstream plain(text);
    std::vector<double> values;
    double value;
    while (plain >> value) values.push_back(value);
    if (values.empty() || !(plain >> std::ws).eof())
        fail(section, key, "expected a whitespace-separated list of reals");
    return values;
}

void Config::reject_unknown_keys(
    const std::map<std::string, std::vector<std::string>>& allowed) const {
    for (const auto& [section, entries] : sections_) {
        const auto spec = allowed.find(section);
        if (spec == allowed.end())
            throw std::runtime_error("config: unknown section [" + section + "]");
        for (const auto& [key, value] : entries) {
            (void)value;
            if (std::find(spec->second.begin(), spec->second.end(), key)
                == spec->second.end())
                fail(section, key, "unknown key");
        }
    }
}

Config parse_config(std::istream& in) {
    Config config;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw std::runtime_error("config: malformed section header at line "
                                         + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key = value at line "
                                     + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
        if (section.empty())
            throw std::runtime_error("config: key before any [section] at line "
                                     + std::to_string(lineno));
        config.set(section, key, value);
    }
    return config;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse_config(in);
}

} // namespace mor
