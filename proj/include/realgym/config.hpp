#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "realgym/errors.hpp"

namespace realgym {

/// Sectioned key-value configuration (INI syntax).
///
///   [dam]
///   surface_area = 145.9
///   [elevator]
///   arrival_rates = 0.05, 0.02, 0.08, 0.01
///
/// Missing keys fall back to the caller's default; keys that are present but
/// do not parse raise ConfigError.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path) {
    Config c;
    try {
      boost::property_tree::ini_parser::read_ini(path, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
  }

  static Config from_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
  }

  bool has(const std::string& section, const std::string& key) const {
    return static_cast<bool>(tree_.get_child_optional(path(section, key)));
  }

  template <typename T>
  T get(const std::string& section, const std::string& key, const T& fallback) const {
    const auto raw = tree_.get_optional<std::string>(path(section, key));
    if (!raw) return fallback;
    return convert<T>(*raw, section, key);
  }

  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const {
    const auto raw = tree_.get_optional<std::string>(path(section, key));
    if (!raw) return fallback;
    std::vector<double> out;
    std::stringstream ss(*raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(convert<double>(item, section, key));
    return out;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    tree_.put(path(section, key), value);
  }

 private:
  static boost::property_tree::ptree::path_type path(const std::string& section,
                                                     const std::string& key) {
    return boost::property_tree::ptree::path_type(section + "/" + key, '/');
  }

  template <typename T>
  static T convert(const std::string& raw, const std::string& section, const std::string& key) {
    if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "True" || raw == "1") return true;
      if (raw == "false" || raw == "False" || raw == "0") return false;
      throw ConfigError("config [" + section + "] " + key + ": expected a boolean, got '" + raw + "'");
    } else {
      std::istringstream in(raw);
      T value{};
      in >> value;
      if (in.fail()) bad(section, key, raw);
      in >> std::ws;
      if (!in.eof()) bad(section, key, raw);
      return value;
    }
  }

  [[noreturn]] static void bad(const std::string& section, const std::string& key,
                               const std::string& raw) {
    throw ConfigError("config [" + section + "] " + key + ": cannot parse '" + raw + "'");
  }

  boost::property_tree::ptree tree_;
};

}  // namespace realgym
