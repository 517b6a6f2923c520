#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "iesim/error.hpp"
#include "iesim/scenario.hpp"

namespace iesim {

namespace {

double variance_of(const Distribution& d) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Dirac>) return 0.0;
        else if constexpr (std::is_same_v<T, Uniform>) return (p.high - p.low) * (p.high - p.low) / 12.0;
        else if constexpr (std::is_same_v<T, Normal>) return p.stddev * p.stddev;
        else if constexpr (std::is_same_v<T, Poisson>) return p.lambda * p.quantum * p.quantum;
        else return 1.0 / (p.rate * p.rate);
      },
      d.params());
}

struct KernelSpec {
  double clock_batch = 1;  // checks per clock tick
  double report_msgs = 0;  // 0: no report arcs
};

AtomicComponent build_kernel(const std::string& device, const ModeTimingModel& timing, const Workload& workload,
                             const KernelSpec& spec) {
  AtomicComponent k(device + ".kernel");
  k.set_owner(device);
  const auto boot = k.add_location("Boot");
  const auto run = k.add_location("Run");
  k.set_initial(boot);
  const auto hour = k.add_variable("hour");
  k.add_variable("batch", spec.clock_batch);
  k.add_variable("msgs", spec.report_msgs);

  k.add_transition({"boot", boot, run, {}, Distribution::dirac(0.0), false, {}, workload.hourly_event});
  k.add_transition({"hour", run, run, {}, Distribution::dirac(3600.0), false,
                    [=](VarSpan v) { v[hour] = std::fmod(v[hour] + 1, 24.0); }, workload.hourly_event});
  k.add_transition({"clk", run, run, {}, timing.clock, true, {}, {}});
  if (spec.report_msgs > 0) {
    const double start = workload.work_start_h;
    const double end = workload.work_end_h;
    k.add_transition({"report", run, run, [=](VarView v) { return v[hour] >= start && v[hour] < end; },
                      Distribution::dirac(workload.working_period_s), true, {}, {}});
    k.add_transition({"report", run, run, [=](VarView v) { return v[hour] < start || v[hour] >= end; },
                      Distribution::dirac(workload.off_period_s), true, {}, {}});
  }
  return k;
}

}  // namespace

ModeTimingModel apply_fitted(ModeTimingModel timing, const std::map<OperatingMode, Distribution>& fitted) {
  for (const auto& [mode, dist] : fitted) {
    switch (mode) {
      case OperatingMode::Tx: timing.arcs.insert_or_assign("initDutyCycle.Tx", dist); break;
      case OperatingMode::CPU: timing.arcs.insert_or_assign("sndPacket", dist); break;
      case OperatingMode::Rx:
        for (const char* arc : {"checkDone", "initDutyCycle.Rx", "rxNext"}) timing.arcs.insert_or_assign(arc, dist);
        break;
      case OperatingMode::LPM: break;
    }
  }
  // An LPM sojourn is the clock period minus one channel check, so the clock
  // is rebuilt from the fitted LPM law and the (possibly fitted) check.
  if (auto it = fitted.find(OperatingMode::LPM); it != fitted.end()) {
    const Distribution& check = timing.at("checkDone");
    const double mean = it->second.mean() + check.mean();
    const double sd = std::sqrt(variance_of(it->second) + variance_of(check));
    if (!(mean > 0)) throw ValidationError("fitted LPM", it->second.describe(), "a positive mean");
    timing.clock = sd > 0 ? Distribution::normal(mean, sd) : Distribution::dirac(mean);
  }
  return timing;
}

const DeviceProfile& BuiltSystem::profile_of(std::string_view id) const {
  const auto& d = device(id);
  auto it = profiles.find(d.type);
  if (it == profiles.end()) throw ModelError(fmt::format("no profile for device type '{}'", d.type));
  return it->second;
}

const DeviceBinding& BuiltSystem::device(std::string_view id) const {
  for (const auto& d : devices)
    if (d.id == id) return d;
  throw ModelError(fmt::format("unknown device '{}'", id));
}

BuiltSystem build_system(const Topology& topology, const EnergyConfig& config, const CalibrationSet& calib,
                         const ProfileMap& profiles, const Workload& workload, const FittedTiming& fitted) {
  config.validate();
  calib.validate();
  workload.validate();
  topology.validate();

  BuiltSystem out;
  out.topology = topology;
  out.workload = workload;
  std::map<std::string, ModeTimingModel, std::less<>> timings;
  for (const auto& d : topology.devices) {
    auto pit = profiles.find(d.type);
    if (pit == profiles.end()) throw ModelError(fmt::format("no profile for device type '{}'", d.type));
    out.profiles.insert_or_assign(d.type, pit->second);
    if (!timings.count(d.type)) {
      auto timing = effect_model(config, d.type, calib);
      if (auto fit = fitted.find(d.type); fit != fitted.end()) timing = apply_fitted(std::move(timing), fit->second);
      timings.emplace(d.type, std::move(timing));
    }
  }

  for (const auto& d : topology.devices) {
    const auto& timing = timings.at(d.type);
    AutomatonOptions opts;
    opts.duty_cycle_arcs = true;
    opts.forward_relays = d.role == DeviceRole::FloorController;
    opts.marks_relay = d.role == DeviceRole::FloorController;
    if (d.role == DeviceRole::FloorServer) opts.process_event = workload.sample_event;

    KernelSpec ks;
    ks.clock_batch = timing.checks_per_tick;
    if (d.role == DeviceRole::FloorServer) ks.report_msgs = static_cast<double>(d.resources.size());
    if (d.role == DeviceRole::FloorController) ks.report_msgs = 1;

    DeviceBinding b;
    b.id = d.id;
    b.type = d.type;
    b.role = d.role;
    b.component = out.model.add_component(build_energy_automaton(profiles.find(d.type)->second, timing, opts, d.id));
    b.kernel = out.model.add_component(build_kernel(d.id, timing, workload, ks));
    out.devices.push_back(std::move(b));
  }

  const auto& comps = out.model.components();
  auto var_of = [&](std::size_t c, std::string_view name) { return comps[c].variable(name); };

  std::map<std::string, std::vector<std::size_t>, std::less<>> local;  // device -> clock/report interactions
  for (const auto& b : out.devices) {
    Interaction clock{fmt::format("clock:{}", b.id), {{b.kernel, "clk"}, {b.component, "tick"}}, {}};
    clock.transfers.push_back({0, var_of(b.kernel, "batch"), 1, var_of(b.component, var::in_checks)});
    local[b.id].push_back(out.model.add_interaction(std::move(clock)));
    if (b.role != DeviceRole::BuildingManager) {
      Interaction report{fmt::format("report:{}", b.id), {{b.kernel, "report"}, {b.component, "tick"}}, {}};
      report.transfers.push_back({0, var_of(b.kernel, "msgs"), 1, var_of(b.component, var::in_msgs)});
      local[b.id].push_back(out.model.add_interaction(std::move(report)));
    }
  }
  for (const auto& l : topology.links) {
    const auto& from = out.device(l.from);
    const auto& to = out.device(l.to);
    Interaction link{fmt::format("link:{}->{}", l.from, l.to), {{from.component, "sndPacket"}, {to.component, "recv"}}, {}};
    link.transfers.push_back({0, var_of(from.component, var::relay_out), 1, var_of(to.component, var::relay_in)});
    const auto li = out.model.add_interaction(std::move(link));
    for (auto lower : local[l.to]) out.model.add_priority(li, lower);
  }
  out.model.finalize();
  return out;
}

BuiltSystem build_system(const Scenario& scenario, const EnergyConfig& config) {
  std::set<std::string, std::less<>> known;
  for (const auto& [name, p] : scenario.profiles) known.insert(name);
  const Topology topo = build_bms_topology(scenario.topology, known);
  return build_system(topo, config, scenario.calibration, scenario.profiles, scenario.workload, scenario.fitted);
}

BuiltSystem build_system(const Scenario& scenario) { return build_system(scenario, scenario.config); }

}  // namespace iesim
