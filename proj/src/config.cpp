#include "nashlab/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nashlab/errors.hpp"

namespace nashlab {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        throw InvalidArgument("config: '" + key + "' is not a number: " + value);
    return v;
}

}  // namespace

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InvalidArgument("config: unterminated section at line " +
                                      std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw InvalidArgument("config: empty section name at line " +
                                      std::to_string(lineno));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw InvalidArgument("config: empty key at line " + std::to_string(lineno));
        cfg.entries_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_text(text);
}

std::string Config::text(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw InvalidArgument("config: missing required key '" + key + "'");
    return it->second;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double Config::number(const std::string& key) const { return parse_number(key, text(key)); }

double Config::number(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : parse_number(key, it->second);
}

int Config::integer(const std::string& key) const {
    const double v = number(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw InvalidArgument("config: '" + key + "' is not an integer");
    return i;
}

int Config::integer(const std::string& key, int fallback) const {
    return has(key) ? integer(key) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw InvalidArgument("config: '" + key + "' is not a boolean: " + v);
}

std::uint64_t Config::counter(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
        throw InvalidArgument("config: '" + key + "' is not an unsigned integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<int> Config::integer_list(const std::string& key) const {
    const std::string raw = text(key);
    std::vector<int> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<int>(parse_number(key, item)));
    }
    if (out.empty()) throw InvalidArgument("config: '" + key + "' is an empty list");
    return out;
}

ParamMap Config::section_params(const std::string& section) const {
    ParamMap params;
    const std::string prefix = section + ".";
    for (const auto& [key, value] : entries_) {
        if (key.rfind(prefix, 0) != 0) continue;
        params[key.substr(prefix.size())] = parse_number(key, value);
    }
    return params;
}

std::uint64_t Config::hash() const {
    // FNV-1a, 64-bit; entries_ is an ordered map so iteration is sorted
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const std::string& s) {
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& [key, value] : entries_) {
        mix(key);
        mix("=");
        mix(value);
        mix("\n");
    }
    return h;
}

std::string Config::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return std::string(buf);
}

}  // namespace nashlab
