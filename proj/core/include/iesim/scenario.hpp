#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "iesim/calibration.hpp"
#include "iesim/config.hpp"
#include "iesim/energy.hpp"
#include "iesim/engine.hpp"
#include "iesim/topology.hpp"

namespace iesim {

using ProfileMap = std::map<std::string, DeviceProfile, std::less<>>;

struct Workload {
  double working_period_s = 30.0;   // report period during working hours
  double off_period_s = 300.0;      // report period otherwise
  double work_start_h = 8.0;
  double work_end_h = 18.0;
  // Always-on peripheral load is billed once per hour under this event name
  // (empty: none); the cost per event comes from the device profile.
  std::string hourly_event = "peripherals-hour";
  // Raised by servers for every report message.
  std::string sample_event = "sensor-read";
  void validate() const;
};

// Fitted interval distributions per (device type, mode); they replace the
// effect-model arcs that produce intervals of that mode.
using FittedTiming = std::map<std::string, std::map<OperatingMode, Distribution>, std::less<>>;

struct Scenario {
  std::string name = "scenario";
  EnergyConfig config;
  ProfileMap profiles;
  TopologySpec topology;
  Workload workload;
  CalibrationSet calibration = CalibrationSet::shipped();
  FittedTiming fitted;
  PowertraceConfig powertrace;
  double horizon_s = 5 * 86400.0;  // default simulation horizon
  std::uint64_t seed = 1;

  void validate() const;
};

Scenario parse_scenario(std::string_view xml);
Scenario load_scenario(const std::filesystem::path& path);
std::string render_scenario(const Scenario& scenario);
// XML fragment for a fitted-timing block (what `iesim fit` writes).
std::string render_fitted_timing(const FittedTiming& fitted);

struct DeviceBinding {
  std::string id;
  std::string type;
  DeviceRole role = DeviceRole::FloorServer;
  std::size_t component = 0;  // energy automaton
  std::size_t kernel = 0;     // OS/application component owned by the device
};

struct BuiltSystem {
  SystemModel model;
  Topology topology;
  std::vector<DeviceBinding> devices;  // ledger order
  ProfileMap profiles;                 // by device type
  Workload workload;

  const DeviceProfile& profile_of(std::string_view device) const;
  const DeviceBinding& device(std::string_view id) const;
};

// One energy automaton plus one kernel (duty-cycle clock, calendar and
// application schedule) per device; link interactions pair sndPacket with recv.
BuiltSystem build_system(const Topology& topology, const EnergyConfig& config, const CalibrationSet& calib,
                         const ProfileMap& profiles, const Workload& workload = {}, const FittedTiming& fitted = {});
BuiltSystem build_system(const Scenario& scenario);
BuiltSystem build_system(const Scenario& scenario, const EnergyConfig& config);

// Applies fitted distributions for one device type onto a timing model.
ModeTimingModel apply_fitted(ModeTimingModel timing, const std::map<OperatingMode, Distribution>& fitted);

}  // namespace iesim
