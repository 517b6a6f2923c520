#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace iesim {

enum class DeviceRole { BuildingManager, FloorController, FloorServer };
std::string_view to_string(DeviceRole role) noexcept;

struct FloorSpec {
  int level = 1;
  std::string device_type;
  std::vector<std::string> resources;  // server endpoints; one report message each
};

struct TopologySpec {
  std::vector<FloorSpec> floors;
  std::string manager_type;
};

struct DeviceNode {
  std::string id;
  std::string type;
  DeviceRole role = DeviceRole::FloorServer;
  int floor = 0;  // 0 for the building-management device
  std::vector<std::string> resources;
};

struct Link {
  std::string from;
  std::string to;
};

struct Topology {
  std::vector<DeviceNode> devices;
  std::vector<Link> links;

  const DeviceNode& device(std::string_view id) const;
  const DeviceNode* find(std::string_view id) const noexcept;
  // Ids of floor devices (controllers and servers), in topology order.
  std::vector<std::string> floor_devices() const;
  void validate() const;
};

inline constexpr std::string_view kManagerId = "bm";
std::string controller_id(int level);
std::string server_id(int level);

// The resources every shipped floor server exposes.
std::vector<std::string> default_resources();
TopologySpec shipped_bms_spec();

// Floors are chained k -> k-1 -> ... -> 1 -> building manager; each server
// reports to its floor controller.
Topology build_bms_topology(const TopologySpec& spec, const std::set<std::string, std::less<>>& known_types);

}  // namespace iesim
