#include "msct/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "msct/error.hpp"

namespace msct {

namespace pt = boost::property_tree;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("config key '" + key + "': '" + text + "' is not a number");
    }
    return v;
}

} // namespace

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

Config Config::parse(const std::string& text) {
    // The INI reader only knows ';' comments; '#' lines are accepted too.
    std::stringstream cleaned;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] == '#') continue;
        cleaned << line << '\n';
    }
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(cleaned, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
    }
    Config c;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            c.values_[name] = node.data();
        } else {
            for (const auto& [key, leaf] : node) c.values_[name + "." + key] = leaf.data();
        }
    }
    return c;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    resolved_[key] = it->second;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    const std::string v = it == values_.end() ? fallback : it->second;
    resolved_[key] = v;
    return v;
}

double Config::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

double Config::get_double(const std::string& key, double fallback) const {
    if (!has(key)) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, fallback);
        resolved_[key] = std::string(buf, res.ptr);
        return fallback;
    }
    return get_double(key);
}

int Config::get_int(const std::string& key) const {
    const auto text = get_string(key);
    int v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("config key '" + key + "': '" + text + "' is not an integer");
    }
    return v;
}

int Config::get_int(const std::string& key, int fallback) const {
    if (!has(key)) {
        resolved_[key] = std::to_string(fallback);
        return fallback;
    }
    return get_int(key);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) {
        resolved_[key] = fallback ? "true" : "false";
        return fallback;
    }
    const auto v = lower(get_string(key));
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    auto text = get_string(key);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string item; in >> item;) out.push_back(item);
    return out;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key)) out.push_back(parse_double(key, item));
    return out;
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
    resolved_[key] = value;
}

std::string Config::dump() const {
    std::ostringstream os;
    std::string section;
    for (const auto& [key, value] : resolved_) {
        if (key.find('.') == std::string::npos) os << key << " = " << value << '\n';
    }
    for (const auto& [key, value] : resolved_) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) continue;
        const auto s = key.substr(0, dot);
        if (s != section) {
            os << '\n' << '[' << s << "]\n";
            section = s;
        }
        os << key.substr(dot + 1) << " = " << value << '\n';
    }
    return os.str();
}

} // namespace msct
