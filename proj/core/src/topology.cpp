#include "iesim/topology.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

std::string_view to_string(DeviceRole role) noexcept {
  switch (role) {
    case DeviceRole::BuildingManager: return "manager";
    case DeviceRole::FloorController: return "controller";
    case DeviceRole::FloorServer: return "server";
  }
  return "?";
}

std::string controller_id(int level) { return fmt::format("floor{}.controller", level); }
std::string server_id(int level) { return fmt::format("floor{}.server", level); }

std::vector<std::string> default_resources() {
  return {"temperature", "humidity", "motion", "light-sensor", "alarm", "light-actuator", "thermostat"};
}

TopologySpec shipped_bms_spec() {
  TopologySpec s;
  s.manager_type = "zolertia-z1";
  const char* types[] = {"zolertia-z1", "sky", "openmote", "sensortag"};
  for (int level = 1; level <= 4; ++level) s.floors.push_back({level, types[level - 1], default_resources()});
  return s;
}

const DeviceNode* Topology::find(std::string_view id) const noexcept {
  for (const auto& d : devices)
    if (d.id == id) return &d;
  return nullptr;
}

const DeviceNode& Topology::device(std::string_view id) const {
  if (const auto* d = find(id)) return *d;
  throw ModelError(fmt::format("unknown device '{}'", id));
}

std::vector<std::string> Topology::floor_devices() const {
  std::vector<std::string> out;
  for (const auto& d : devices)
    if (d.role != DeviceRole::BuildingManager) out.push_back(d.id);
  return out;
}

void Topology::validate() const {
  if (devices.empty()) throw ModelError("empty topology");
  std::map<std::string, int> per_floor;
  for (const auto& d : devices) {
    if (std::count_if(devices.begin(), devices.end(), [&](const DeviceNode& o) { return o.id == d.id; }) != 1)
      throw ModelError(fmt::format("duplicate device id '{}'", d.id));
    if (d.role != DeviceRole::BuildingManager) per_floor[std::to_string(d.floor)]++;
  }
  for (const auto& [floor, n] : per_floor)
    if (n != 2) throw ModelError(fmt::format("floor {} has {} devices, expected 2", floor, n));
  std::map<std::string, std::string> next;
  for (const auto& l : links) {
    if (!find(l.from) || !find(l.to)) throw ModelError(fmt::format("dangling link {} -> {}", l.from, l.to));
    if (!next.emplace(l.from, l.to).second) throw ModelError(fmt::format("device '{}' has two uplinks", l.from));
  }
  // Every forwarding path must end at a device without uplink (the root).
  for (const auto& d : devices) {
    std::string cur = d.id;
    for (std::size_t hops = 0; next.count(cur); ++hops) {
      if (hops > devices.size()) throw ModelError(fmt::format("forwarding cycle through '{}'", d.id));
      cur = next[cur];
    }
    if (!devices.empty() && find(kManagerId) && cur != kManagerId)
      throw ModelError(fmt::format("device '{}' does not reach the building manager", d.id));
  }
}

Topology build_bms_topology(const TopologySpec& spec, const std::set<std::string, std::less<>>& known_types) {
  if (spec.floors.empty()) throw ModelError("a BMS topology needs at least one floor");
  auto check_type = [&](const std::string& type) {
    if (!known_types.count(type)) {
      std::string known;
      for (const auto& t : known_types) known += (known.empty() ? "" : ", ") + t;
      throw ModelError(fmt::format("unknown device type '{}' (known profiles: {})", type, known));
    }
  };
  check_type(spec.manager_type);
  std::vector<FloorSpec> floors = spec.floors;
  std::sort(floors.begin(), floors.end(), [](const FloorSpec& a, const FloorSpec& b) { return a.level < b.level; });
  for (std::size_t i = 0; i < floors.size(); ++i) {
    if (floors[i].level < 1) throw ModelError(fmt::format("floor level {} must be >= 1", floors[i].level));
    if (i > 0 && floors[i].level == floors[i - 1].level)
      throw ModelError(fmt::format("floor level {} declared twice", floors[i].level));
    check_type(floors[i].device_type);
  }

  Topology t;
  t.devices.push_back({std::string(kManagerId), spec.manager_type, DeviceRole::BuildingManager, 0, {}});
  std::string downstream(kManagerId);
  for (const auto& f : floors) {
    t.devices.push_back({controller_id(f.level), f.device_type, DeviceRole::FloorController, f.level, {}});
    t.devices.push_back({server_id(f.level), f.device_type, DeviceRole::FloorServer, f.level, f.resources});
    t.links.push_back({server_id(f.level), controller_id(f.level)});
    t.links.push_back({controller_id(f.level), downstream});
    downstream = controller_id(f.level);
  }
  t.validate();
  return t;
}

}  // namespace iesim
