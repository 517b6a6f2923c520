#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "iesim/calibration.hpp"
#include "iesim/energy.hpp"
#include "iesim/scenario.hpp"
#include "iesim/smc.hpp"

namespace iesim::test {

inline std::string data_path(const std::string& name) { return std::string(IESIM_DATA_DIR) + "/" + name; }

inline const Scenario& shipped() {
  static const Scenario s = load_scenario(data_path("bms.xml"));
  return s;
}

inline DeviceProfile profile(double i_lpm, double i_cpu, double i_tx, double i_rx, double vcc = 3.0, double cap_ah = 1.0) {
  DeviceProfile p;
  p.name = "test";
  p.current = {i_lpm, i_cpu, i_tx, i_rx};
  p.vcc = vcc;
  p.battery_capacity_ah = cap_ah;
  return p;
}

// Intervals tile [0, T) with random modes; some gaps when `gaps` is set.
inline EnergyLedger random_ledger(std::mt19937_64& rng, bool gaps = false, std::size_t max_intervals = 60) {
  std::uniform_int_distribution<std::size_t> count(1, max_intervals);
  std::uniform_int_distribution<int> mode(0, 3);
  std::uniform_real_distribution<double> len(1e-4, 50.0);
  std::bernoulli_distribution skip(0.2);
  EnergyLedger l;
  l.device = "d";
  double t = 0.0;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (gaps && skip(rng)) t += len(rng);
    const double d = len(rng);
    l.intervals.push_back({static_cast<OperatingMode>(mode(rng)), t, d});
    t += d;
  }
  std::uniform_real_distribution<double> when(0.0, t);
  std::uniform_int_distribution<int> events(0, 5);
  for (int e = events(rng); e > 0; --e) l.peripheral_events.push_back({when(rng), e % 2 ? "sensor-read" : "led"});
  l.window = {0.0, t};
  return l;
}

inline DeviceProfile random_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> small(1e-7, 1e-4), big(1e-3, 3e-2), volt(1.8, 3.6), cap(0.2, 4.0),
      cost(0.0, 0.1);
  DeviceProfile p = profile(small(rng), big(rng), big(rng), big(rng), volt(rng), cap(rng));
  p.voltage[1] = volt(rng);  // one mode with its own voltage
  p.peripheral_costs["sensor-read"] = cost(rng);
  p.peripheral_costs["led"] = cost(rng);
  return p;
}

// Observables the effect-model laws talk about.
struct EffectView {
  double tx, cpu, rx, check, wakeups_per_s, lpm_per_check;
};

inline EffectView view(const EnergyConfig& c, std::string_view type = "zolertia-z1",
                       const CalibrationSet& calib = CalibrationSet::shipped()) {
  const auto m = effect_model(c, type, calib);
  const double period = m.clock.mean();
  const double check = m.mean("checkDone");
  return {m.mean("initDutyCycle.Tx"),         m.mean("sndPacket"), m.mean("initDutyCycle.Rx"), check,
          m.checks_per_tick / period, (period - check) / m.checks_per_tick};
}

inline EnergyConfig random_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rdc(0, 3), freq(1, 16), retx(0, 5), svc(0, 2), header(16, 32);
  std::uniform_real_distribution<double> inter(0.0, 1.0);
  EnergyConfig c;
  c.rdc_protocol = static_cast<RdcProtocol>(rdc(rng));
  c.rdc_frequency = 2 * freq(rng);
  c.retransmissions = retx(rng);
  c.service_protocol = static_cast<ServiceProtocol>(svc(rng));
  c.header_size = 2 * header(rng);
  c.interference = inter(rng);
  return c;
}

// Laws (d)-(g) for one base config and one parameter, comparing every pair of
// values in the parameter's range. Returns the number of pairs checked and
// appends a description of each failure to `failures`.
inline std::size_t check_laws(const EnergyConfig& base, std::string_view type, std::vector<std::string>& failures) {
  std::size_t pairs = 0;
  auto fail = [&](const std::string& what, const EnergyConfig& a, const EnergyConfig& b) {
    failures.push_back(what + ": " + render_config(a) + " vs " + render_config(b));
  };
  auto vary = [&](std::string_view key, auto&& law) {
    const auto values = sweep_values(key);
    for (std::size_t i = 0; i < values.size(); ++i) {
      for (std::size_t j = i + 1; j < values.size(); ++j) {
        EnergyConfig lo = base, hi = base;
        set_parameter(lo, key, values[i]);
        set_parameter(hi, key, values[j]);
        law(lo, hi, view(lo, type), view(hi, type));
        ++pairs;
      }
    }
  };
  vary(config_key::retransmissions, [&](auto& a, auto& b, const EffectView& x, const EffectView& y) {
    if (y.tx < x.tx) fail("(d) Tx vs retransmissions", a, b);
  });
  vary(config_key::interference, [&](auto& a, auto& b, const EffectView& x, const EffectView& y) {
    if (y.tx < x.tx) fail("(d) Tx vs interference", a, b);
  });
  vary(config_key::header_size, [&](auto& a, auto& b, const EffectView& x, const EffectView& y) {
    if (!(y.tx > x.tx)) fail("(e) Tx vs header", a, b);
    if (!(y.cpu < x.cpu)) fail("(e) CPU vs header", a, b);
  });
  vary(config_key::rdc_frequency, [&](auto& a, auto& b, const EffectView& x, const EffectView& y) {
    if (!(y.wakeups_per_s > x.wakeups_per_s)) fail("(f) wake-ups vs frequency", a, b);
  });
  EnergyConfig coap = base, mqtt = base;
  coap.service_protocol = ServiceProtocol::CoAP;
  mqtt.service_protocol = ServiceProtocol::MQTT;
  const auto c = view(coap, type), m = view(mqtt, type);
  if (m.tx + m.rx < c.tx + c.rx) fail("(g) MQTT vs CoAP radio time", coap, mqtt);
  return pairs + 1;
}

// Outcome i is an independent Bernoulli(p) draw keyed by (seed, i).
inline Sampler bernoulli_sampler(double p, std::uint64_t seed) {
  return [p, seed](std::size_t i) {
    Rng rng = make_rng(derive_seed(seed, i));
    return std::bernoulli_distribution(p)(rng);
  };
}

}  // namespace iesim::test
