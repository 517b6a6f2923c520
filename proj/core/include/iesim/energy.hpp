#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "iesim/model.hpp"

namespace iesim {

struct DeviceProfile {
  std::string name;
  std::array<double, kModeCount> current{};  // amperes, indexed by OperatingMode
  std::array<double, kModeCount> voltage{};  // volts; 0 means "use vcc"
  double battery_capacity_ah = 0.0;
  double vcc = 0.0;
  std::map<std::string, double> peripheral_costs;  // joules per event

  double current_of(OperatingMode m) const noexcept { return current[index(m)]; }
  double voltage_of(OperatingMode m) const noexcept {
    const double v = voltage[index(m)];
    return v > 0 ? v : vcc;
  }
  double power(OperatingMode m) const noexcept { return current_of(m) * voltage_of(m); }
  double peripheral_cost(const std::string& event) const;  // throws EnergyError when unknown
  void validate() const;
};

struct ModeInterval {
  OperatingMode mode = OperatingMode::LPM;
  double start = 0.0;
  double duration = 0.0;
  double end() const noexcept { return start + duration; }
};

struct PeripheralEvent {
  double time = 0.0;
  std::string name;
};

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
  double length() const noexcept { return end - begin; }
};

struct EnergyLedger {
  std::string device;
  std::vector<ModeInterval> intervals;
  std::vector<PeripheralEvent> peripheral_events;
  TimeWindow window;

  // N_y of the duty-cycle definition: visits per mode.
  std::array<std::size_t, kModeCount> visit_counts() const noexcept;
  std::array<double, kModeCount> mode_times() const noexcept;
  // Restriction to a sub-window; straddling intervals are clipped.
  EnergyLedger clipped(TimeWindow w) const;
  void validate() const;
};

double mode_energy(const EnergyLedger& ledger, const DeviceProfile& profile, OperatingMode mode);
double peripheral_energy(const EnergyLedger& ledger, const DeviceProfile& profile);
double total_energy(const EnergyLedger& ledger, const DeviceProfile& profile);
// Energy share of one mode (E_y / E_total).
double duty_cycle_energy(const EnergyLedger& ledger, const DeviceProfile& profile, OperatingMode mode);
// Time share of one mode over the ledger window.
double duty_cycle_time(const EnergyLedger& ledger, OperatingMode mode);
// Time share over a union of disjoint windows.
double duty_cycle_time(const EnergyLedger& ledger, OperatingMode mode, std::span<const TimeWindow> windows);
// Battery energy over average power, in hours.
double lifetime_hours(const DeviceProfile& profile, const EnergyLedger& ledger);
double lifetime_hours(const DeviceProfile& profile, double energy_joules, double window_seconds);

// Aggregated per-mode time and peripheral counts; enough for every quantity
// above without keeping individual intervals.
struct ModeTotals {
  std::array<double, kModeCount> time{};
  std::map<std::string, std::size_t> peripheral_counts;
  double window = 0.0;

  static ModeTotals from(const EnergyLedger& ledger);
  double total_energy(const DeviceProfile& profile) const;
  double mode_energy(const DeviceProfile& profile, OperatingMode m) const { return profile.power(m) * time[index(m)]; }
  double duty_cycle_time(OperatingMode m) const;
  double duty_cycle_energy(const DeviceProfile& profile, OperatingMode m) const;
  double lifetime_hours(const DeviceProfile& profile) const;
};

// Working-hours windows [start_h, end_h) of every simulated day within [0, horizon).
std::vector<TimeWindow> working_windows(double horizon, double start_h = 8.0, double end_h = 18.0);

}  // namespace iesim
