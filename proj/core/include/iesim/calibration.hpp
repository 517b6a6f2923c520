#pragma once

#include <map>
#include <string>
#include <string_view>

#include "iesim/config.hpp"
#include "iesim/energy_automaton.hpp"

namespace iesim {

struct ProtocolCoefficients {
  double check_s = 0.0;               // radio-on time of one channel check
  double sender_wait_periods = 0.0;   // Tx time spent waiting for the receiver, in wake periods
  double linger_periods = 0.0;        // Rx time after a reception, in wake periods
  bool always_on = false;             // radio never sleeps
};

// Coefficients of the parametric effect model. Parameter categories combine
// without cross-terms: Tx = (wait/f + air*service) * attempts(interference,
// retransmissions); CPU = base + slope*(header_max - header); Rx = (air*service
// + linger/f) * radio_factor.
struct CalibrationSet {
  double check_batch_s = 30.0;   // one clock tick stands for round(batch*f) checks
  double clock_jitter = 0.01;    // relative sd of the clock period
  double quantum_s = 0.001;      // Poisson duration quantum
  double bitrate_bps = 250000.0;
  int payload_bytes = 32;
  int header_max = 64;
  double cpu_base_s = 0.004;
  double cpu_per_header_byte_s = 0.0002;  // compression work per byte below header_max
  double rx_spread = 0.1;                 // relative sd of Normal Rx sojourns
  double collision_gain = 0.9;            // collision probability per unit interference
  double collision_cap = 0.9;
  double false_wakeup_gain = 1.0;         // false wake-up probability per unit interference
  double false_wakeup_listen = 1.0;       // extra listening per false wake-up, in wake periods
  std::map<RdcProtocol, ProtocolCoefficients> protocols;
  std::map<ServiceProtocol, double> service_overhead;
  std::map<std::string, double, std::less<>> radio_factor;  // per device type, default 1

  static CalibrationSet shipped();
  void validate() const;
  double radio_factor_of(std::string_view device_type) const;
};

// Expected number of transmissions of one message.
double expected_attempts(const EnergyConfig& config, const CalibrationSet& calib);

ModeTimingModel effect_model(const EnergyConfig& config, std::string_view device_type, const CalibrationSet& calib);

}  // namespace iesim
