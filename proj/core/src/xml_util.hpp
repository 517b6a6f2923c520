#pragma once

#include <sstream>
#include <string>
#include <string_view>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "iesim/config.hpp"
#include "iesim/error.hpp"

namespace iesim::detail {

using boost::property_tree::ptree;

inline ptree read_xml(std::string_view text) {
  ptree pt;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_xml(in, pt, boost::property_tree::xml_parser::trim_whitespace);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw ValidationError("document", e.message(), "well-formed XML");
  }
  return pt;
}

inline std::string write_xml(const ptree& pt) {
  std::ostringstream out;
  boost::property_tree::write_xml(out, pt, boost::property_tree::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

inline std::string trimmed(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Parses the full string as a number; throws ValidationError naming `field`.
double parse_double(std::string_view field, std::string_view text, std::string_view allowed);
long long parse_integer(std::string_view field, std::string_view text, std::string_view allowed);

EnergyConfig config_from_tree(const ptree& node);
ptree config_to_tree(const EnergyConfig& cfg);

}  // namespace iesim::detail
