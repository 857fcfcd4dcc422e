#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nashlab/catalog.hpp"

namespace nashlab {

/// Flat key/value configuration with [section] headers; keys are stored as
/// "section.key". '#' and ';' start comments, later duplicates win, and no
/// code is ever loaded from a config.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    std::string text(const std::string& key) const;  // throws when missing
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    int integer(const std::string& key) const;
    int integer(const std::string& key, int fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::uint64_t counter(const std::string& key, std::uint64_t fallback) const;
    /// Comma-separated integers, e.g. a player sweep "2,3,4".
    std::vector<int> integer_list(const std::string& key) const;

    /// Numeric entries of one section, keyed by bare name; feeds the catalog.
    ParamMap section_params(const std::string& section) const;

    /// FNV-1a over the sorted normalized entries; stable across reruns and
    /// key order, recorded in every report.
    std::uint64_t hash() const;
    std::string hash_hex() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

}  // namespace nashlab
