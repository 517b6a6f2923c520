#include "iesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "iesim/error.hpp"
#include "xml_util.hpp"

namespace iesim {

namespace detail {

double parse_double(std::string_view field, std::string_view text, std::string_view allowed) {
  const std::string s = trimmed(std::string(text));
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end || !std::isfinite(v))
    throw ValidationError(std::string(field), std::string(text), std::string(allowed));
  return v;
}

long long parse_integer(std::string_view field, std::string_view text, std::string_view allowed) {
  const std::string s = trimmed(std::string(text));
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) throw ValidationError(std::string(field), std::string(text), std::string(allowed));
  return v;
}

}  // namespace detail

namespace {

std::string normalized(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

constexpr std::string_view kFrequencyRange = "even integer in [2, 32]";
constexpr std::string_view kRetransmissionRange = "integer in [0, 5]";
constexpr std::string_view kHeaderRange = "even integer in [32, 64]";
constexpr std::string_view kInterferenceRange = "[0, 1]";

}  // namespace

std::string_view to_string(RdcProtocol p) noexcept {
  switch (p) {
    case RdcProtocol::ContikiMAC: return "ContikiMAC";
    case RdcProtocol::XMAC: return "XMAC";
    case RdcProtocol::LPP: return "LPP";
    case RdcProtocol::NullRDC: return "NullRDC";
  }
  return "?";
}

std::string_view to_string(ServiceProtocol p) noexcept {
  switch (p) {
    case ServiceProtocol::CoAP: return "CoAP";
    case ServiceProtocol::MQTT: return "MQTT";
    case ServiceProtocol::HTTP: return "HTTP";
  }
  return "?";
}

RdcProtocol parse_rdc_protocol(std::string_view text) {
  const std::string n = normalized(text);
  for (auto p : {RdcProtocol::ContikiMAC, RdcProtocol::XMAC, RdcProtocol::LPP, RdcProtocol::NullRDC})
    if (n == normalized(to_string(p))) return p;
  if (n == "null") return RdcProtocol::NullRDC;
  throw ValidationError(std::string(config_key::rdc_protocol), std::string(text), "ContikiMAC|XMAC|LPP|NullRDC");
}

ServiceProtocol parse_service_protocol(std::string_view text) {
  const std::string n = normalized(text);
  for (auto p : {ServiceProtocol::CoAP, ServiceProtocol::MQTT, ServiceProtocol::HTTP})
    if (n == normalized(to_string(p))) return p;
  throw ValidationError(std::string(config_key::service_protocol), std::string(text), "CoAP|MQTT|HTTP");
}

void EnergyConfig::validate() const {
  if (rdc_frequency < 2 || rdc_frequency > 32 || rdc_frequency % 2 != 0)
    throw ValidationError(std::string(config_key::rdc_frequency), std::to_string(rdc_frequency), std::string(kFrequencyRange));
  if (retransmissions < 0 || retransmissions > 5)
    throw ValidationError(std::string(config_key::retransmissions), std::to_string(retransmissions),
                          std::string(kRetransmissionRange));
  if (header_size < 32 || header_size > 64 || header_size % 2 != 0)
    throw ValidationError(std::string(config_key::header_size), std::to_string(header_size), std::string(kHeaderRange));
  if (!(interference >= 0.0 && interference <= 1.0))
    throw ValidationError(std::string(config_key::interference), fmt::format("{}", interference),
                          std::string(kInterferenceRange));
}

void set_parameter(EnergyConfig& config, std::string_view key, std::string_view value) {
  auto as_int = [&](std::string_view allowed) {
    const long long v = detail::parse_integer(key, value, allowed);
    if (v < -1000000 || v > 1000000) throw ValidationError(std::string(key), std::string(value), std::string(allowed));
    return static_cast<int>(v);
  };
  if (key == config_key::rdc_protocol) {
    config.rdc_protocol = parse_rdc_protocol(detail::trimmed(std::string(value)));
  } else if (key == config_key::rdc_frequency) {
    config.rdc_frequency = as_int(kFrequencyRange);
  } else if (key == config_key::retransmissions) {
    config.retransmissions = as_int(kRetransmissionRange);
  } else if (key == config_key::service_protocol) {
    config.service_protocol = parse_service_protocol(detail::trimmed(std::string(value)));
  } else if (key == config_key::header_size) {
    config.header_size = as_int(kHeaderRange);
  } else if (key == config_key::interference) {
    config.interference = detail::parse_double(key, value, kInterferenceRange);
  } else {
    throw ValidationError("parameter", std::string(key),
                          "rdc-protocol|rdc-frequency|retransmissions|service-protocol|header-size|interference");
  }
}

std::string get_parameter(const EnergyConfig& config, std::string_view key) {
  if (key == config_key::rdc_protocol) return std::string(to_string(config.rdc_protocol));
  if (key == config_key::rdc_frequency) return std::to_string(config.rdc_frequency);
  if (key == config_key::retransmissions) return std::to_string(config.retransmissions);
  if (key == config_key::service_protocol) return std::string(to_string(config.service_protocol));
  if (key == config_key::header_size) return std::to_string(config.header_size);
  if (key == config_key::interference) return fmt::format("{}", config.interference);
  throw ValidationError("parameter", std::string(key),
                        "rdc-protocol|rdc-frequency|retransmissions|service-protocol|header-size|interference");
}

std::vector<std::string> sweep_values(std::string_view key) {
  std::vector<std::string> out;
  if (key == config_key::rdc_protocol) {
    for (auto p : {RdcProtocol::ContikiMAC, RdcProtocol::XMAC, RdcProtocol::LPP, RdcProtocol::NullRDC})
      out.emplace_back(to_string(p));
  } else if (key == config_key::rdc_frequency) {
    for (int f = 2; f <= 32; f += 2) out.push_back(std::to_string(f));
  } else if (key == config_key::retransmissions) {
    for (int r = 0; r <= 5; ++r) out.push_back(std::to_string(r));
  } else if (key == config_key::service_protocol) {
    for (auto p : {ServiceProtocol::CoAP, ServiceProtocol::MQTT, ServiceProtocol::HTTP}) out.emplace_back(to_string(p));
  } else if (key == config_key::header_size) {
    for (int h = 32; h <= 64; h += 2) out.push_back(std::to_string(h));
  } else if (key == config_key::interference) {
    for (int i = 0; i <= 10; ++i) out.push_back(fmt::format("{:.1f}", i / 10.0));
  } else {
    get_parameter(EnergyConfig{}, key);  // throws the usual ValidationError
  }
  return out;
}

namespace detail {

EnergyConfig config_from_tree(const ptree& node) {
  EnergyConfig cfg;
  for (const auto& [key, child] : node) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
    set_parameter(cfg, key, child.get_value<std::string>());
  }
  cfg.validate();
  return cfg;
}

ptree config_to_tree(const EnergyConfig& cfg) {
  ptree node;
  for (auto key : {config_key::rdc_protocol, config_key::rdc_frequency, config_key::retransmissions,
                   config_key::service_protocol, config_key::header_size, config_key::interference})
    node.put(ptree::path_type(std::string(key), '/'), get_parameter(cfg, key));
  return node;
}

}  // namespace detail

EnergyConfig parse_config(std::string_view xml) {
  const auto pt = detail::read_xml(xml);
  if (auto node = pt.get_child_optional("energy-config")) return detail::config_from_tree(*node);
  for (const auto& [key, child] : pt) {
    if (auto node = child.get_child_optional("energy-config")) return detail::config_from_tree(*node);
  }
  throw ValidationError("document", "no <energy-config> element", "<energy-config> at the root or one level below");
}

std::string render_config(const EnergyConfig& config) {
  config.validate();
  detail::ptree pt;
  pt.add_child("energy-config", detail::config_to_tree(config));
  return detail::write_xml(pt);
}

}  // namespace iesim
