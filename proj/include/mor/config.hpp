#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mor {

// Flat sectioned key = value configuration:
//
//   # comment
//   [section]
//   key = value
//
// Values keep their raw text; typed accessors convert on demand and throw
// std::runtime_error with the section/key named when conversion fails or a
// required key is missing. Duplicate keys within a section are rejected.
class Config {
  public:
    using Section = std::map<std::string, std::string>;

    void set(const std::string& section, const std::string& key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;

    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

    // Whitespace-separated list of reals; supports the shorthand
    // "logspace a b count" for log-spaced points between a and b.
    std::vector<double> get_double_list(const std::string& section,
                                        const std::string& key) const;

    const std::map<std::string, Section>& sections() const { return sections_; }

    // Typo protection: every present section.key must appear in `allowed`
    // (map from section to permitted keys), else std::runtime_error.
    void reject_unknown_keys(
        const std::map<std::string, std::vector<std::string>>& allowed) const;

  private:
    std::map<std::string, Section> sections_;
};

Config parse_config(std::istream& in);
Config parse_config_file(const std::string& path);

} // namespace mor
