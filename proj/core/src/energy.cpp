#include "iesim/energy.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

namespace {
constexpr double kSecondsPerHour = 3600.0;
constexpr double kSecondsPerDay = 86400.0;
}  // namespace

double DeviceProfile::peripheral_cost(const std::string& event) const {
  auto it = peripheral_costs.find(event);
  if (it == peripheral_costs.end())
    throw EnergyError(fmt::format("profile '{}' has no cost for peripheral event '{}'", name, event));
  return it->second;
}

void DeviceProfile::validate() const {
  auto bad = [&](const std::string& field, double v, const char* allowed) {
    throw ValidationError(fmt::format("profile {}: {}", name, field), fmt::format("{}", v), allowed);
  };
  for (auto m : kAllModes) {
    const double i = current_of(m);
    if (!std::isfinite(i) || i <= 0) bad(fmt::format("current[{}]", to_string(m)), i, "> 0 A");
    const double v = voltage[index(m)];
    if (!std::isfinite(v) || v < 0) bad(fmt::format("voltage[{}]", to_string(m)), v, "> 0 V (or 0 for vcc)");
  }
  if (!std::isfinite(vcc) || vcc <= 0) bad("vcc", vcc, "> 0 V");
  if (!std::isfinite(battery_capacity_ah) || battery_capacity_ah <= 0) bad("battery_capacity", battery_capacity_ah, "> 0 Ah");
  const double lpm = current_of(OperatingMode::LPM);
  if (lpm >= current_of(OperatingMode::Rx)) bad("current[LPM]", lpm, "< current[Rx]");
  if (lpm >= current_of(OperatingMode::Tx)) bad("current[LPM]", lpm, "< current[Tx]");
  for (const auto& [event, cost] : peripheral_costs)
    if (!std::isfinite(cost) || cost < 0) bad(fmt::format("peripheral[{}]", event), cost, ">= 0 J");
}

std::array<std::size_t, kModeCount> EnergyLedger::visit_counts() const noexcept {
  std::array<std::size_t, kModeCount> n{};
  for (const auto& iv : intervals) n[index(iv.mode)]++;
  return n;
}

std::array<double, kModeCount> EnergyLedger::mode_times() const noexcept {
  std::array<double, kModeCount> t{};
  for (const auto& iv : intervals) t[index(iv.mode)] += iv.duration;
  return t;
}

EnergyLedger EnergyLedger::clipped(TimeWindow w) const {
  EnergyLedger out;
  out.device = device;
  out.window = {std::max(w.begin, window.begin), std::min(w.end, window.end)};
  if (out.window.end < out.window.begin) out.window.end = out.window.begin;
  for (const auto& iv : intervals) {
    const double s = std::max(iv.start, out.window.begin);
    const double e = std::min(iv.end(), out.window.end);
    if (e > s) out.intervals.push_back({iv.mode, s, e - s});
  }
  for (const auto& ev : peripheral_events)
    if (ev.time >= out.window.begin && ev.time < out.window.end) out.peripheral_events.push_back(ev);
  return out;
}

void EnergyLedger::validate() const {
  if (!(window.end >= window.begin)) throw EnergyError(fmt::format("ledger {}: inverted window", device));
  double last_end = window.begin;
  constexpr double eps = 1e-9;
  for (const auto& iv : intervals) {
    if (!(iv.duration >= 0)) throw EnergyError(fmt::format("ledger {}: negative interval", device));
    if (iv.start < last_end - eps) throw EnergyError(fmt::format("ledger {}: overlapping intervals at {}", device, iv.start));
    if (iv.end() > window.end + eps) throw EnergyError(fmt::format("ledger {}: interval beyond window", device));
    last_end = iv.end();
  }
}

double mode_energy(const EnergyLedger& ledger, const DeviceProfile& profile, OperatingMode mode) {
  const double p = profile.power(mode);
  double e = 0.0;
  for (const auto& iv : ledger.intervals)
    if (iv.mode == mode) e += p * iv.duration;
  return e;
}

double peripheral_energy(const EnergyLedger& ledger, const DeviceProfile& profile) {
  double e = 0.0;
  for (const auto& ev : ledger.peripheral_events) e += profile.peripheral_cost(ev.name);
  return e;
}

double total_energy(const EnergyLedger& ledger, const DeviceProfile& profile) {
  double e = peripheral_energy(ledger, profile);
  for (auto m : kAllModes) e += mode_energy(ledger, profile, m);
  return e;
}

double duty_cycle_energy(const EnergyLedger& ledger, const DeviceProfile& profile, OperatingMode mode) {
  const double total = total_energy(ledger, profile);
  if (!(total > 0)) throw EnergyError(fmt::format("ledger {}: energy duty cycle undefined for zero total energy", ledger.device));
  return mode_energy(ledger, profile, mode) / total;
}

double duty_cycle_time(const EnergyLedger& ledger, OperatingMode mode) {
  const double len = ledger.window.length();
  if (!(len > 0)) throw EnergyError(fmt::format("ledger {}: empty window", ledger.device));
  return ledger.mode_times()[index(mode)] / len;
}

double duty_cycle_time(const EnergyLedger& ledger, OperatingMode mode, std::span<const TimeWindow> windows) {
  double t = 0.0;
  double len = 0.0;
  for (const auto& w : windows) {
    const EnergyLedger part = ledger.clipped(w);
    t += part.mode_times()[index(mode)];
    len += part.window.length();
  }
  if (!(len > 0)) throw EnergyError(fmt::format("ledger {}: windows do not overlap the ledger", ledger.device));
  return t / len;
}

double lifetime_hours(const DeviceProfile& profile, double energy_joules, double window_seconds) {
  if (!(window_seconds > 0)) throw EnergyError("lifetime: zero-length window");
  if (!(energy_joules > 0)) throw EnergyError("lifetime: zero energy");
  const double battery_j = profile.battery_capacity_ah * profile.vcc * kSecondsPerHour;
  const double p_avg = energy_joules / window_seconds;
  return battery_j / p_avg / kSecondsPerHour;
}

double lifetime_hours(const DeviceProfile& profile, const EnergyLedger& ledger) {
  return lifetime_hours(profile, total_energy(ledger, profile), ledger.window.length());
}

ModeTotals ModeTotals::from(const EnergyLedger& ledger) {
  ModeTotals t;
  t.time = ledger.mode_times();
  for (const auto& ev : ledger.peripheral_events) t.peripheral_counts[ev.name]++;
  t.window = ledger.window.length();
  return t;
}

double ModeTotals::total_energy(const DeviceProfile& profile) const {
  double e = 0.0;
  for (auto m : kAllModes) e += mode_energy(profile, m);
  for (const auto& [name, n] : peripheral_counts) e += static_cast<double>(n) * profile.peripheral_cost(name);
  return e;
}

double ModeTotals::duty_cycle_time(OperatingMode m) const {
  if (!(window > 0)) throw EnergyError("duty cycle over an empty window");
  return time[index(m)] / window;
}

double ModeTotals::duty_cycle_energy(const DeviceProfile& profile, OperatingMode m) const {
  const double total = total_energy(profile);
  if (!(total > 0)) throw EnergyError("energy duty cycle undefined for zero total energy");
  return mode_energy(profile, m) / total;
}

double ModeTotals::lifetime_hours(const DeviceProfile& profile) const {
  return iesim::lifetime_hours(profile, total_energy(profile), window);
}

std::vector<TimeWindow> working_windows(double horizon, double start_h, double end_h) {
  std::vector<TimeWindow> out;
  for (double day = 0; day * kSecondsPerDay < horizon; ++day) {
    const double b = day * kSecondsPerDay + start_h * kSecondsPerHour;
    const double e = std::min(horizon, day * kSecondsPerDay + end_h * kSecondsPerHour);
    if (e > b) out.push_back({b, e});
  }
  return out;
}

}  // namespace iesim
