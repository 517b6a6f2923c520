#include "iesim/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

CalibrationSet CalibrationSet::shipped() {
  CalibrationSet c;
  c.protocols[RdcProtocol::XMAC] = {0.0008, 0.3, 5.3, false};
  c.protocols[RdcProtocol::ContikiMAC] = {0.0010, 1.0, 18.0, false};
  c.protocols[RdcProtocol::LPP] = {0.0004, 0.3, 0.5, false};
  c.protocols[RdcProtocol::NullRDC] = {0.0, 0.0, 0.0, true};
  c.service_overhead[ServiceProtocol::CoAP] = 1.0;
  c.service_overhead[ServiceProtocol::MQTT] = 1.3;
  c.service_overhead[ServiceProtocol::HTTP] = 1.8;
  c.radio_factor["zolertia-z1"] = 1.0;
  c.radio_factor["sky"] = 0.65;
  c.radio_factor["openmote"] = 0.4;
  c.radio_factor["sensortag"] = 0.28;
  return c;
}

void CalibrationSet::validate() const {
  auto positive = [](std::string_view name, double v) {
    if (!std::isfinite(v) || v <= 0) throw ValidationError(fmt::format("calibration.{}", name), fmt::format("{}", v), "> 0");
  };
  auto non_negative = [](std::string_view name, double v) {
    if (!std::isfinite(v) || v < 0) throw ValidationError(fmt::format("calibration.{}", name), fmt::format("{}", v), ">= 0");
  };
  positive("check-batch", check_batch_s);
  non_negative("clock-jitter", clock_jitter);
  positive("quantum", quantum_s);
  positive("bitrate", bitrate_bps);
  non_negative("payload", payload_bytes);
  positive("header-max", header_max);
  positive("cpu-base", cpu_base_s);
  non_negative("cpu-per-header-byte", cpu_per_header_byte_s);
  positive("rx-spread", rx_spread);
  non_negative("collision-gain", collision_gain);
  if (!(collision_cap >= 0 && collision_cap < 1))
    throw ValidationError("calibration.collision-cap", fmt::format("{}", collision_cap), "[0, 1)");
  non_negative("false-wakeup-gain", false_wakeup_gain);
  non_negative("false-wakeup-listen", false_wakeup_listen);
  for (auto p : {RdcProtocol::ContikiMAC, RdcProtocol::XMAC, RdcProtocol::LPP, RdcProtocol::NullRDC}) {
    auto it = protocols.find(p);
    if (it == protocols.end())
      throw ValidationError("calibration.protocol", std::string(to_string(p)), "coefficients for every RDC protocol");
    non_negative(fmt::format("{}.check", to_string(p)), it->second.check_s);
    non_negative(fmt::format("{}.sender-wait", to_string(p)), it->second.sender_wait_periods);
    non_negative(fmt::format("{}.linger", to_string(p)), it->second.linger_periods);
    if (!it->second.always_on) positive(fmt::format("{}.check", to_string(p)), it->second.check_s);
  }
  for (auto s : {ServiceProtocol::CoAP, ServiceProtocol::MQTT, ServiceProtocol::HTTP}) {
    auto it = service_overhead.find(s);
    if (it == service_overhead.end())
      throw ValidationError("calibration.service", std::string(to_string(s)), "overhead for every service protocol");
    positive(fmt::format("{}.overhead", to_string(s)), it->second);
  }
  for (const auto& [type, g] : radio_factor) positive(fmt::format("radio-factor[{}]", type), g);
}

double CalibrationSet::radio_factor_of(std::string_view device_type) const {
  auto it = radio_factor.find(device_type);
  return it == radio_factor.end() ? 1.0 : it->second;
}

double expected_attempts(const EnergyConfig& config, const CalibrationSet& calib) {
  const double q = std::min(calib.collision_cap, calib.collision_gain * config.interference);
  double a = 0.0;
  double qj = 1.0;
  for (int j = 0; j <= config.retransmissions; ++j) {
    a += qj;
    qj *= q;
  }
  return a;
}

namespace {

Distribution count_duration(double mean_s, double quantum) {
  const double lambda = mean_s / quantum;
  if (!(lambda > 0)) return Distribution::dirac(0.0);
  return Distribution::poisson(lambda, quantum);
}

Distribution normal_duration(double mean_s, double rel_sd) {
  if (!(mean_s > 0)) return Distribution::dirac(0.0);
  return Distribution::normal(mean_s, rel_sd * mean_s);
}

}  // namespace

ModeTimingModel effect_model(const EnergyConfig& config, std::string_view device_type, const CalibrationSet& calib) {
  config.validate();
  const auto& pp = calib.protocols.at(config.rdc_protocol);
  const double f = config.rdc_frequency;
  const double g = calib.radio_factor_of(device_type);
  const double svc = calib.service_overhead.at(config.service_protocol);
  const double air = (config.header_size + calib.payload_bytes) * 8.0 / calib.bitrate_bps;

  const double tx = (pp.sender_wait_periods / f + air * svc) * expected_attempts(config, calib);
  const double cpu = calib.cpu_base_s + calib.cpu_per_header_byte_s * std::max(0, calib.header_max - config.header_size);
  const double rx = (air * svc + pp.linger_periods / f) * g;

  const double batch = calib.check_batch_s;
  const int k = std::max(1, static_cast<int>(std::lround(batch * f)));
  double check = batch;
  if (!pp.always_on) {
    const double false_wakeups = std::min(1.0, calib.false_wakeup_gain * config.interference);
    check = std::min(batch, k * pp.check_s * g + k * false_wakeups * calib.false_wakeup_listen / f);
  }

  ModeTimingModel m;
  const Distribution zero = Distribution::dirac(0.0);
  m.arcs.emplace("activate", zero);
  m.arcs.emplace("process", zero);
  m.arcs.emplace("recv", zero);
  m.arcs.emplace("tick", zero);
  m.arcs.emplace("wakeup", zero);
  m.arcs.emplace("sndPacket", count_duration(cpu, calib.quantum_s));
  m.arcs.emplace("initDutyCycle.Tx", count_duration(tx, calib.quantum_s));
  m.arcs.emplace("initDutyCycle.Rx", normal_duration(rx, calib.rx_spread));
  m.arcs.emplace("rxNext", normal_duration(rx, calib.rx_spread));
  // An always-on radio listens for the whole clock period.
  m.arcs.emplace("checkDone", pp.always_on ? Distribution::dirac(check) : normal_duration(check, calib.rx_spread));
  m.clock = calib.clock_jitter > 0 ? Distribution::normal(batch, calib.clock_jitter * batch) : Distribution::dirac(batch);
  m.checks_per_tick = k;
  return m;
}

}  // namespace iesim
