#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace iesim {

enum class RdcProtocol { ContikiMAC, XMAC, LPP, NullRDC };
enum class ServiceProtocol { CoAP, MQTT, HTTP };

std::string_view to_string(RdcProtocol p) noexcept;
std::string_view to_string(ServiceProtocol p) noexcept;
RdcProtocol parse_rdc_protocol(std::string_view text);          // ValidationError
ServiceProtocol parse_service_protocol(std::string_view text);  // ValidationError

struct EnergyConfig {
  RdcProtocol rdc_protocol = RdcProtocol::XMAC;
  int rdc_frequency = 8;  // Hz
  int retransmissions = 4;
  ServiceProtocol service_protocol = ServiceProtocol::CoAP;
  int header_size = 48;  // bytes
  double interference = 0.0;

  void validate() const;
  friend bool operator==(const EnergyConfig&, const EnergyConfig&) = default;
};

// Element names as they appear in the XML configuration.
namespace config_key {
inline constexpr std::string_view rdc_protocol = "rdc-protocol";
inline constexpr std::string_view rdc_frequency = "rdc-frequency";
inline constexpr std::string_view retransmissions = "retransmissions";
inline constexpr std::string_view service_protocol = "service-protocol";
inline constexpr std::string_view header_size = "header-size";
inline constexpr std::string_view interference = "interference";
}  // namespace config_key

// Accepts an <energy-config> element, either as the document root or as a
// child of the root. Missing parameters keep their defaults.
EnergyConfig parse_config(std::string_view xml);
std::string render_config(const EnergyConfig& config);

// Sets one parameter from its textual value (used by sweeps and the XML reader).
void set_parameter(EnergyConfig& config, std::string_view key, std::string_view value);
std::string get_parameter(const EnergyConfig& config, std::string_view key);

// Every parameter name, in XML order.
inline constexpr std::string_view kParameterKeys[] = {config_key::rdc_protocol,     config_key::rdc_frequency,
                                                       config_key::retransmissions,  config_key::service_protocol,
                                                       config_key::header_size,      config_key::interference};
// Values a sweep visits: the full discrete range, or a 0.1 grid for interference.
std::vector<std::string> sweep_values(std::string_view key);

}  // namespace iesim
