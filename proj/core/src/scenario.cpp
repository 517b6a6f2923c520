#include "iesim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "iesim/error.hpp"
#include "iesim/units.hpp"
#include "xml_util.hpp"

namespace iesim {

using detail::ptree;

namespace {

const ptree& attrs_of(const ptree& node) {
  static const ptree empty;
  auto a = node.get_child_optional("<xmlattr>");
  return a ? *a : empty;
}

std::optional<std::string> attr(const ptree& node, const std::string& name) {
  auto v = attrs_of(node).get_optional<std::string>(ptree::path_type(name, '/'));
  if (!v) return std::nullopt;
  return detail::trimmed(*v);
}

std::string require_attr(const ptree& node, const std::string& element, const std::string& name) {
  auto v = attr(node, name);
  if (!v) throw ValidationError(fmt::format("<{}> attribute {}", element, name), "missing", "required");
  return *v;
}

double number(const ptree& node, const std::string& element, const std::string& name) {
  return detail::parse_double(fmt::format("<{}> {}", element, name), require_attr(node, element, name), "a number");
}

void read_number(const ptree& node, const std::string& element, const std::string& name, double& out) {
  if (auto v = attr(node, name)) out = detail::parse_double(fmt::format("<{}> {}", element, name), *v, "a number");
}

void read_int(const ptree& node, const std::string& element, const std::string& name, int& out) {
  if (auto v = attr(node, name))
    out = static_cast<int>(detail::parse_integer(fmt::format("<{}> {}", element, name), *v, "an integer"));
}

bool parse_bool(const std::string& field, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError(field, s, "true|false");
}

template <class F>
void for_each_child(const ptree& node, const std::string& name, F f) {
  for (const auto& [key, child] : node)
    if (key == name) f(child);
}

std::string fmt_num(double v) { return fmt::format("{}", v); }

void put_attr(ptree& node, const std::string& name, const std::string& value) {
  node.put(ptree::path_type("<xmlattr>/" + name, '/'), value);
}

}  // namespace

namespace detail {

Distribution distribution_from_tree(const ptree& node, const std::string& element) {
  const auto kind = parse_distribution_kind(require_attr(node, element, "distribution"));
  switch (kind) {
    case DistributionKind::Dirac: return Distribution::dirac(number(node, element, "value"));
    case DistributionKind::Uniform: return Distribution::uniform(number(node, element, "low"), number(node, element, "high"));
    case DistributionKind::Normal: return Distribution::normal(number(node, element, "mean"), number(node, element, "stddev"));
    case DistributionKind::Poisson: {
      double quantum = 1.0;
      read_number(node, element, "quantum", quantum);
      return Distribution::poisson(number(node, element, "lambda"), quantum);
    }
    case DistributionKind::Exponential: return Distribution::exponential(number(node, element, "rate"));
  }
  throw ValidationError(element, "distribution", "known kind");
}

void distribution_to_tree(ptree& node, const Distribution& d) {
  put_attr(node, "distribution", std::string(to_string(d.kind())));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Dirac>) {
          put_attr(node, "value", fmt_num(p.value));
        } else if constexpr (std::is_same_v<T, Uniform>) {
          put_attr(node, "low", fmt_num(p.low));
          put_attr(node, "high", fmt_num(p.high));
        } else if constexpr (std::is_same_v<T, Normal>) {
          put_attr(node, "mean", fmt_num(p.mean));
          put_attr(node, "stddev", fmt_num(p.stddev));
        } else if constexpr (std::is_same_v<T, Poisson>) {
          put_attr(node, "lambda", fmt_num(p.lambda));
          put_attr(node, "quantum", fmt_num(p.quantum));
        } else {
          put_attr(node, "rate", fmt_num(p.rate));
        }
      },
      d.params());
}

}  // namespace detail

namespace {

DeviceProfile profile_from_tree(const ptree& node) {
  DeviceProfile p;
  p.name = require_attr(node, "profile", "name");
  const std::string el = fmt::format("profile {}", p.name);
  p.vcc = number(node, el, "vcc");
  p.battery_capacity_ah = number(node, el, "battery-ah");
  for_each_child(node, "mode", [&](const ptree& m) {
    const std::string name = require_attr(m, el + " mode", "name");
    const auto mode = parse_mode(name);
    if (!mode) throw ValidationError(el + " mode", name, "LPM|CPU|Tx|Rx");
    p.current[index(*mode)] = number(m, el + " mode", "current-a");
    read_number(m, el + " mode", "voltage-v", p.voltage[index(*mode)]);
  });
  for_each_child(node, "peripheral", [&](const ptree& e) {
    p.peripheral_costs[require_attr(e, el + " peripheral", "event")] = number(e, el + " peripheral", "cost-j");
  });
  p.validate();
  return p;
}

ptree profile_to_tree(const DeviceProfile& p) {
  ptree node;
  put_attr(node, "name", p.name);
  put_attr(node, "vcc", fmt_num(p.vcc));
  put_attr(node, "battery-ah", fmt_num(p.battery_capacity_ah));
  for (auto m : kAllModes) {
    ptree mode;
    put_attr(mode, "name", std::string(to_string(m)));
    put_attr(mode, "current-a", fmt_num(p.current_of(m)));
    if (p.voltage[index(m)] > 0) put_attr(mode, "voltage-v", fmt_num(p.voltage[index(m)]));
    node.add_child("mode", mode);
  }
  for (const auto& [event, cost] : p.peripheral_costs) {
    ptree e;
    put_attr(e, "event", event);
    put_attr(e, "cost-j", fmt_num(cost));
    node.add_child("peripheral", e);
  }
  return node;
}

void fitted_from_tree(const ptree& node, FittedTiming& out) {
  const std::string type = require_attr(node, "fitted-timing", "device-type");
  for_each_child(node, "mode", [&](const ptree& m) {
    const std::string name = require_attr(m, "fitted-timing mode", "name");
    const auto mode = parse_mode(name);
    if (!mode) throw ValidationError("fitted-timing mode", name, "LPM|CPU|Tx|Rx");
    out[type][*mode] = detail::distribution_from_tree(m, "fitted-timing mode");
  });
}

ptree fitted_to_tree(const std::string& type, const std::map<OperatingMode, Distribution>& modes) {
  ptree node;
  put_attr(node, "device-type", type);
  for (const auto& [mode, dist] : modes) {
    ptree m;
    put_attr(m, "name", std::string(to_string(mode)));
    detail::distribution_to_tree(m, dist);
    node.add_child("mode", m);
  }
  return node;
}

CalibrationSet calibration_from_tree(const ptree& node, FittedTiming& fitted) {
  CalibrationSet c = CalibrationSet::shipped();
  const std::string el = "calibration";
  read_number(node, el, "check-batch-s", c.check_batch_s);
  read_number(node, el, "clock-jitter", c.clock_jitter);
  read_number(node, el, "quantum-s", c.quantum_s);
  read_number(node, el, "bitrate-bps", c.bitrate_bps);
  read_int(node, el, "payload-bytes", c.payload_bytes);
  read_int(node, el, "header-max", c.header_max);
  read_number(node, el, "cpu-base-s", c.cpu_base_s);
  read_number(node, el, "cpu-per-header-byte-s", c.cpu_per_header_byte_s);
  read_number(node, el, "rx-spread", c.rx_spread);
  read_number(node, el, "collision-gain", c.collision_gain);
  read_number(node, el, "collision-cap", c.collision_cap);
  read_number(node, el, "false-wakeup-gain", c.false_wakeup_gain);
  read_number(node, el, "false-wakeup-listen", c.false_wakeup_listen);
  for_each_child(node, "protocol", [&](const ptree& p) {
    const auto proto = parse_rdc_protocol(require_attr(p, "protocol", "name"));
    auto& pc = c.protocols[proto];
    read_number(p, "protocol", "check-s", pc.check_s);
    read_number(p, "protocol", "sender-wait-periods", pc.sender_wait_periods);
    read_number(p, "protocol", "linger-periods", pc.linger_periods);
    if (auto v = attr(p, "always-on")) pc.always_on = parse_bool("protocol always-on", *v);
  });
  for_each_child(node, "service", [&](const ptree& s) {
    c.service_overhead[parse_service_protocol(require_attr(s, "service", "name"))] = number(s, "service", "overhead");
  });
  for_each_child(node, "radio-factor", [&](const ptree& r) {
    c.radio_factor[require_attr(r, "radio-factor", "type")] = number(r, "radio-factor", "value");
  });
  for_each_child(node, "fitted-timing", [&](const ptree& f) { fitted_from_tree(f, fitted); });
  c.validate();
  return c;
}

ptree calibration_to_tree(const CalibrationSet& c, const FittedTiming& fitted) {
  ptree node;
  put_attr(node, "check-batch-s", fmt_num(c.check_batch_s));
  put_attr(node, "clock-jitter", fmt_num(c.clock_jitter));
  put_attr(node, "quantum-s", fmt_num(c.quantum_s));
  put_attr(node, "bitrate-bps", fmt_num(c.bitrate_bps));
  put_attr(node, "payload-bytes", std::to_string(c.payload_bytes));
  put_attr(node, "header-max", std::to_string(c.header_max));
  put_attr(node, "cpu-base-s", fmt_num(c.cpu_base_s));
  put_attr(node, "cpu-per-header-byte-s", fmt_num(c.cpu_per_header_byte_s));
  put_attr(node, "rx-spread", fmt_num(c.rx_spread));
  put_attr(node, "collision-gain", fmt_num(c.collision_gain));
  put_attr(node, "collision-cap", fmt_num(c.collision_cap));
  put_attr(node, "false-wakeup-gain", fmt_num(c.false_wakeup_gain));
  put_attr(node, "false-wakeup-listen", fmt_num(c.false_wakeup_listen));
  for (const auto& [proto, pc] : c.protocols) {
    ptree p;
    put_attr(p, "name", std::string(to_string(proto)));
    put_attr(p, "check-s", fmt_num(pc.check_s));
    put_attr(p, "sender-wait-periods", fmt_num(pc.sender_wait_periods));
    put_attr(p, "linger-periods", fmt_num(pc.linger_periods));
    put_attr(p, "always-on", pc.always_on ? "true" : "false");
    node.add_child("protocol", p);
  }
  for (const auto& [svc, overhead] : c.service_overhead) {
    ptree s;
    put_attr(s, "name", std::string(to_string(svc)));
    put_attr(s, "overhead", fmt_num(overhead));
    node.add_child("service", s);
  }
  for (const auto& [type, g] : c.radio_factor) {
    ptree r;
    put_attr(r, "type", type);
    put_attr(r, "value", fmt_num(g));
    node.add_child("radio-factor", r);
  }
  for (const auto& [type, modes] : fitted) node.add_child("fitted-timing", fitted_to_tree(type, modes));
  return node;
}

}  // namespace

void Workload::validate() const {
  if (!(working_period_s > 0)) throw ValidationError("workload.working-period-s", fmt_num(working_period_s), "> 0");
  if (!(off_period_s > 0)) throw ValidationError("workload.off-period-s", fmt_num(off_period_s), "> 0");
  auto whole_hour = [](double h) { return h >= 0 && h <= 24 && h == std::floor(h); };
  if (!whole_hour(work_start_h) || !whole_hour(work_end_h) || work_start_h >= work_end_h)
    throw ValidationError("workload.work-hours", fmt::format("[{}, {})", work_start_h, work_end_h),
                          "whole hours with 0 <= start < end <= 24");
}

void Scenario::validate() const {
  config.validate();
  if (profiles.empty()) throw ValidationError("profiles", "none", "at least one device profile");
  for (const auto& [name, p] : profiles) p.validate();
  workload.validate();
  calibration.validate();
  powertrace.validate();
  if (!(horizon_s > 0)) throw ValidationError("horizon", fmt_num(horizon_s), "> 0");
  for (const auto& [name, p] : profiles) {
    if (!workload.hourly_event.empty() && !p.peripheral_costs.count(workload.hourly_event))
      throw ValidationError(fmt::format("profile {} peripheral", name), workload.hourly_event, "a cost entry");
    if (!workload.sample_event.empty() && !p.peripheral_costs.count(workload.sample_event))
      throw ValidationError(fmt::format("profile {} peripheral", name), workload.sample_event, "a cost entry");
  }
}

Scenario parse_scenario(std::string_view xml) {
  const auto pt = detail::read_xml(xml);
  auto root_opt = pt.get_child_optional("scenario");
  if (!root_opt) throw ValidationError("document", "no <scenario> root", "<scenario>");
  const ptree& root = *root_opt;

  Scenario s;
  if (auto v = attr(root, "name")) s.name = *v;
  if (auto v = attr(root, "horizon")) s.horizon_s = parse_duration(*v);
  if (auto v = attr(root, "seed"))
    s.seed = static_cast<std::uint64_t>(detail::parse_integer("<scenario> seed", *v, "a non-negative integer"));

  if (auto node = root.get_child_optional("energy-config")) s.config = detail::config_from_tree(*node);
  if (auto node = root.get_child_optional("profiles")) {
    for_each_child(*node, "profile", [&](const ptree& p) {
      DeviceProfile prof = profile_from_tree(p);
      const std::string name = prof.name;
      if (!s.profiles.emplace(name, std::move(prof)).second)
        throw ValidationError("profile", name, "unique profile names");
    });
  }
  if (auto node = root.get_child_optional("topology")) {
    s.topology.manager_type = require_attr(*node, "topology", "manager-type");
    for_each_child(*node, "floor", [&](const ptree& f) {
      FloorSpec fs;
      fs.level = static_cast<int>(detail::parse_integer("<floor> level", require_attr(f, "floor", "level"), "an integer"));
      fs.device_type = require_attr(f, "floor", "type");
      for_each_child(f, "resource", [&](const ptree& r) { fs.resources.push_back(detail::trimmed(r.data())); });
      if (fs.resources.empty()) fs.resources = default_resources();
      s.topology.floors.push_back(std::move(fs));
    });
  } else {
    s.topology = shipped_bms_spec();
  }
  if (auto node = root.get_child_optional("workload")) {
    read_number(*node, "workload", "working-period-s", s.workload.working_period_s);
    read_number(*node, "workload", "off-period-s", s.workload.off_period_s);
    read_number(*node, "workload", "work-start-h", s.workload.work_start_h);
    read_number(*node, "workload", "work-end-h", s.workload.work_end_h);
    if (auto v = attr(*node, "hourly-event")) s.workload.hourly_event = *v;
    if (auto v = attr(*node, "sample-event")) s.workload.sample_event = *v;
  }
  if (auto node = root.get_child_optional("calibration")) s.calibration = calibration_from_tree(*node, s.fitted);
  if (auto node = root.get_child_optional("powertrace")) {
    read_number(*node, "powertrace", "period-s", s.powertrace.period_s);
    read_number(*node, "powertrace", "rtimer-hz", s.powertrace.rtimer_hz);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario", path.string(), "a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string render_scenario(const Scenario& s) {
  ptree root;
  put_attr(root, "name", s.name);
  put_attr(root, "horizon", format_duration(s.horizon_s));
  put_attr(root, "seed", std::to_string(s.seed));
  root.add_child("energy-config", detail::config_to_tree(s.config));
  ptree profiles;
  for (const auto& [name, p] : s.profiles) profiles.add_child("profile", profile_to_tree(p));
  root.add_child("profiles", profiles);
  ptree topo;
  put_attr(topo, "manager-type", s.topology.manager_type);
  for (const auto& f : s.topology.floors) {
    ptree floor;
    put_attr(floor, "level", std::to_string(f.level));
    put_attr(floor, "type", f.device_type);
    for (const auto& r : f.resources) floor.add("resource", r);
    topo.add_child("floor", floor);
  }
  root.add_child("topology", topo);
  ptree wl;
  put_attr(wl, "working-period-s", fmt_num(s.workload.working_period_s));
  put_attr(wl, "off-period-s", fmt_num(s.workload.off_period_s));
  put_attr(wl, "work-start-h", fmt_num(s.workload.work_start_h));
  put_attr(wl, "work-end-h", fmt_num(s.workload.work_end_h));
  put_attr(wl, "hourly-event", s.workload.hourly_event);
  put_attr(wl, "sample-event", s.workload.sample_event);
  root.add_child("workload", wl);
  root.add_child("calibration", calibration_to_tree(s.calibration, s.fitted));
  ptree pt_cfg;
  put_attr(pt_cfg, "period-s", fmt_num(s.powertrace.period_s));
  put_attr(pt_cfg, "rtimer-hz", fmt_num(s.powertrace.rtimer_hz));
  root.add_child("powertrace", pt_cfg);
  ptree doc;
  doc.add_child("scenario", root);
  return detail::write_xml(doc);
}

std::string render_fitted_timing(const FittedTiming& fitted) {
  ptree doc;
  ptree cal;
  for (const auto& [type, modes] : fitted) cal.add_child("fitted-timing", fitted_to_tree(type, modes));
  doc.add_child("calibration", cal);
  return detail::write_xml(doc);
}

}  // namespace iesim
