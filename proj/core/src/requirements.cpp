#include "iesim/requirements.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "iesim/error.hpp"
#include "json.hpp"

namespace iesim {

namespace {

using nlohmann::json;

// Stream used to pick the sampled device; kept clear of component streams
// and of the engine's tie-break stream.
constexpr std::uint64_t kSelectorStream = 0xFFFFFFFEull;

double number(const json& j, std::string_view field) {
  if (!j.is_number()) throw ValidationError(std::string(field), j.dump(), "a number");
  return j.get<double>();
}

std::string text(const json& j, std::string_view field) {
  if (!j.is_string()) throw ValidationError(std::string(field), j.dump(), "a string");
  return j.get<std::string>();
}

SmcOverrides overrides_from(const json& j, std::string_view where) {
  if (!j.is_object()) throw ValidationError(std::string(where), j.dump(), "an object");
  SmcOverrides o;
  for (const auto& [key, v] : j.items()) {
    if (key == "method") o.method = parse_smc_method(text(v, key));
    else if (key == "alpha") o.alpha = number(v, key);
    else if (key == "beta") o.beta = number(v, key);
    else if (key == "theta") o.theta = number(v, key);
    else if (key == "delta") o.delta = number(v, key);
    else if (key == "indifference") {
      if (!v.is_array() || v.size() != 2) throw ValidationError(key, v.dump(), "[p1, p0]");
      o.p1 = number(v[0], "p1");
      o.p0 = number(v[1], "p0");
    } else if (key == "max-samples") {
      const double n = number(v, key);
      if (!(n >= 1) || n != static_cast<double>(static_cast<std::size_t>(n)))
        throw ValidationError(key, v.dump(), "integer >= 1");
      o.max_samples = static_cast<std::size_t>(n);
    } else {
      throw ValidationError(std::string(where) + "." + key, v.dump(),
                            "method|alpha|beta|theta|delta|indifference|max-samples");
    }
  }
  return o;
}

Requirement requirement_from(const json& j, const SmcOverrides& defaults) {
  if (!j.is_object()) throw ValidationError("requirements[]", j.dump(), "an object");
  Requirement r;
  defaults.apply(r.method, r.smc);
  bool has_type = false, has_threshold = false, has_mode = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "id") r.property.id = text(v, key);
    else if (key == "type") r.property.kind = parse_property_kind(text(v, key)), has_type = true;
    else if (key == "threshold") r.property.threshold = number(v, key), has_threshold = true;
    else if (key == "scope") r.property.scope = parse_scope(text(v, key));
    else if (key == "share") r.property.share = parse_share_kind(text(v, key));
    else if (key == "mode") {
      const auto m = parse_mode(text(v, key));
      if (!m) throw ValidationError(key, v.dump(), "LPM|CPU|Tx|Rx");
      r.property.mode = *m;
      has_mode = true;
    } else if (key == "devices") {
      if (v.is_string() && v.get<std::string>() == "floor") continue;
      if (!v.is_array() || v.empty()) throw ValidationError(key, v.dump(), "\"floor\" or a non-empty list of device ids");
      for (const auto& d : v) r.devices.push_back(text(d, key));
    } else if (key == "smc") {
      overrides_from(v, "smc").apply(r.method, r.smc);
    } else {
      throw ValidationError(key, v.dump(), "id|type|threshold|mode|scope|share|devices|smc");
    }
  }
  if (r.property.id.empty()) throw ValidationError("id", j.dump(), "a non-empty string");
  if (!has_type) throw ValidationError(r.property.id + ".type", "missing", "a property type");
  if (!has_threshold) throw ValidationError(r.property.id + ".threshold", "missing", "a number");
  if (r.property.kind != PropertyKind::LifetimeAtLeast && !has_mode)
    throw ValidationError(r.property.id + ".mode", "missing", "LPM|CPU|Tx|Rx");
  r.property.validate();
  r.smc.validate();
  return r;
}

std::size_t pick(std::uint64_t replica_seed, std::size_t n) {
  Rng rng = make_rng(derive_seed(replica_seed, kSelectorStream));
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
}

std::vector<std::size_t> first_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::string fmt6(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

std::string_view to_string(SmcMethod method) noexcept { return method == SmcMethod::Estimate ? "estimate" : "sprt"; }

SmcMethod parse_smc_method(std::string_view text) {
  if (text == "estimate") return SmcMethod::Estimate;
  if (text == "sprt") return SmcMethod::Sprt;
  throw ValidationError("method", std::string(text), "estimate|sprt");
}

void SmcOverrides::apply(SmcMethod& m, SmcConfig& cfg) const {
  if (method) m = *method;
  if (alpha) cfg.alpha = *alpha;
  if (beta) cfg.beta = *beta;
  if (theta) cfg.theta = *theta;
  if (p1) cfg.p1 = *p1;
  if (p0) cfg.p0 = *p0;
  if (delta) cfg.delta = *delta;
  if (max_samples) cfg.max_samples = *max_samples;
}

const Requirement& RequirementSet::find(std::string_view id) const {
  for (const auto& r : items)
    if (r.property.id == id) return r;
  std::string known;
  for (const auto& r : items) known += (known.empty() ? "" : "|") + r.property.id;
  throw ValidationError("requirement", std::string(id), known.empty() ? "none defined" : known);
}

RequirementSet RequirementSet::select(const std::vector<std::string>& ids) const {
  RequirementSet out;
  for (const auto& id : ids) out.items.push_back(find(id));
  return out;
}

void RequirementSet::override_smc(const SmcOverrides& overrides) {
  for (auto& r : items) {
    overrides.apply(r.method, r.smc);
    r.smc.validate();
  }
}

RequirementSet parse_requirements(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("document", e.what(), "well-formed JSON");
  }
  if (!doc.is_object()) throw ValidationError("document", doc.dump(), "an object");
  SmcOverrides defaults;
  if (doc.contains("defaults")) defaults = overrides_from(doc["defaults"], "defaults");
  if (!doc.contains("requirements") || !doc["requirements"].is_array())
    throw ValidationError("requirements", "missing", "a list");
  for (const auto& [key, v] : doc.items())
    if (key != "defaults" && key != "requirements") throw ValidationError(key, v.dump(), "defaults|requirements");
  RequirementSet set;
  for (const auto& item : doc["requirements"]) {
    Requirement r = requirement_from(item, defaults);
    for (const auto& other : set.items)
      if (other.property.id == r.property.id) throw ValidationError("id", r.property.id, "unique ids");
    set.items.push_back(std::move(r));
  }
  return set;
}

RequirementSet load_requirements(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("requirements", path.string(), "a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_requirements(buf.str());
}

ReplicaCache::ReplicaCache(const BuiltSystem& system, double horizon, std::uint64_t root_seed)
    : system_(&system), horizon_(horizon), root_seed_(root_seed) {
  if (!(horizon > 0)) throw ValidationError("horizon", fmt::format("{}", horizon), "> 0");
}

const std::vector<DeviceUsage>& ReplicaCache::get(std::size_t replica) {
  Slot* slot;
  {
    std::lock_guard lock(mutex_);
    auto& p = slots_[replica];
    if (!p) p = std::make_unique<Slot>();
    slot = p.get();
  }
  std::call_once(slot->once, [&] {
    UsageAccumulator acc(system_->model, horizon_, system_->workload.work_start_h, system_->workload.work_end_h);
    run(system_->model, horizon_, derive_seed(root_seed_, replica), acc);
    slot->usage = acc.take();
  });
  return slot->usage;
}

std::vector<std::size_t> ReplicaCache::computed() const {
  std::lock_guard lock(mutex_);
  std::vector<std::size_t> out;
  for (const auto& [i, slot] : slots_)
    if (!slot->usage.empty()) out.push_back(i);
  return out;
}

Sampler make_sampler(ReplicaCache& cache, const Property& property, std::vector<std::string> devices) {
  property.validate();
  const BuiltSystem& sys = cache.system();
  if (devices.empty()) devices = sys.topology.floor_devices();
  if (devices.empty()) throw ValidationError("devices", "[]", "at least one device");
  std::vector<std::size_t> slots;
  std::vector<const DeviceProfile*> profiles;
  for (const auto& id : devices) {
    const auto it = std::find_if(sys.devices.begin(), sys.devices.end(), [&](const auto& d) { return d.id == id; });
    if (it == sys.devices.end()) throw ValidationError("devices", id, "a device of the scenario");
    slots.push_back(static_cast<std::size_t>(it - sys.devices.begin()));
    profiles.push_back(&sys.profile_of(id));
  }
  return [&cache, property, slots, profiles](std::size_t i) {
    const auto& usage = cache.get(i);
    const std::size_t k = pick(derive_seed(cache.root_seed(), i), slots.size());
    return evaluate(property, usage[slots[k]], *profiles[k]);
  };
}

std::vector<DeviceSummary> summarize(ReplicaCache& cache, const std::vector<std::size_t>& replicas) {
  const BuiltSystem& sys = cache.system();
  std::vector<DeviceSummary> out(sys.devices.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d].device = sys.devices[d].id;
    out[d].type = sys.devices[d].type;
  }
  if (replicas.empty()) return out;
  for (std::size_t r : replicas) {
    const auto& usage = cache.get(r);
    for (std::size_t d = 0; d < out.size(); ++d) {
      const DeviceProfile& prof = sys.profile_of(out[d].device);
      const DeviceUsage& u = usage[d];
      for (auto m : kAllModes) {
        out[d].time_share[index(m)] += u.whole.duty_cycle_time(m);
        out[d].working_share[index(m)] += u.working.window > 0 ? u.working.duty_cycle_time(m) : 0.0;
        out[d].energy_share[index(m)] += u.whole.duty_cycle_energy(prof, m);
      }
      out[d].energy_j += u.whole.total_energy(prof);
      out[d].lifetime_h += u.whole.lifetime_hours(prof);
    }
  }
  const double n = static_cast<double>(replicas.size());
  for (auto& s : out) {
    for (std::size_t m = 0; m < kModeCount; ++m) {
      s.time_share[m] /= n;
      s.working_share[m] /= n;
      s.energy_share[m] /= n;
    }
    s.energy_j /= n;
    s.lifetime_h /= n;
  }
  return out;
}

double mean_floor_lifetime(ReplicaCache& cache, const std::vector<std::size_t>& replicas) {
  const BuiltSystem& sys = cache.system();
  std::vector<std::size_t> floor;
  for (std::size_t d = 0; d < sys.devices.size(); ++d)
    if (sys.devices[d].role != DeviceRole::BuildingManager) floor.push_back(d);
  if (floor.empty() || replicas.empty()) throw Error("mean floor lifetime needs floor devices and replicas");
  double total = 0.0;
  for (std::size_t r : replicas) {
    const auto& usage = cache.get(r);
    double sum = 0.0;
    for (std::size_t d : floor) sum += usage[d].whole.lifetime_hours(sys.profile_of(sys.devices[d].id));
    total += sum / static_cast<double>(floor.size());
  }
  return total / static_cast<double>(replicas.size());
}

bool VerificationReport::all_hold() const noexcept {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.verdict.holds(); });
}

VerificationReport verify_requirements(ReplicaCache& cache, const RequirementSet& requirements, unsigned jobs) {
  VerificationReport report;
  report.horizon = cache.horizon();
  report.seed = cache.root_seed();
  for (const auto& req : requirements.items) {
    const Sampler sampler = make_sampler(cache, req.property, req.devices);
    Verdict v = req.method == SmcMethod::Estimate ? estimate(sampler, req.smc, jobs) : sprt(sampler, req.smc, jobs);
    report.results.push_back({req, v});
  }
  const auto drawn = cache.computed();
  report.replicas = drawn.size();
  report.devices = summarize(cache, drawn);
  return report;
}

VerificationReport verify_requirements(const Scenario& scenario, const RequirementSet& requirements,
                                       const VerifyOptions& options) {
  const BuiltSystem built = build_system(scenario);
  ReplicaCache cache(built, options.horizon > 0 ? options.horizon : scenario.horizon_s,
                     options.seed.value_or(scenario.seed));
  VerificationReport report = verify_requirements(cache, requirements, options.jobs);
  report.scenario = scenario.name;
  report.config = scenario.config;
  return report;
}

void write_report_csv(std::ostream& out, const VerificationReport& report) {
  out << "requirement,verdict,p_hat,samples\n";
  for (const auto& r : report.results)
    out << r.requirement.property.id << ',' << to_string(r.verdict.kind) << ',' << fmt6(r.verdict.p_hat) << ','
        << r.verdict.samples << '\n';
}

void write_report_table(std::ostream& out, const VerificationReport& report) {
  fmt::print(out, "scenario {}  rdc {}  horizon {:g} s  seed {}  replicas {}\n\n", report.scenario,
             to_string(report.config.rdc_protocol), report.horizon, report.seed, report.replicas);
  if (!report.results.empty()) {
    fmt::print(out, "{:<10} {:<36} {:<9} {:<13} {:>8} {:>8}  {}\n", "id", "property", "method", "verdict", "p_hat",
               "samples", "holds");
    for (const auto& r : report.results)
      fmt::print(out, "{:<10} {:<36} {:<9} {:<13} {:>8.4f} {:>8}  {}\n", r.requirement.property.id,
                 r.requirement.property.describe(), to_string(r.requirement.method), to_string(r.verdict.kind),
                 r.verdict.p_hat, r.verdict.samples, r.verdict.holds() ? "yes" : "no");
    out << '\n';
  }
  fmt::print(out, "{:<18} {:<12} {:>7} {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7} {:>7} {:>11} {:>9}\n", "device", "type",
             "LPM", "CPU", "Tx", "Rx", "wLPM", "wCPU", "wTx", "wRx", "energy_J", "lf_h");
  for (const auto& d : report.devices)
    fmt::print(out, "{:<18} {:<12} {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f} | {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f} {:>11.3f} {:>9.2f}\n",
               d.device, d.type, d.time_share[0], d.time_share[1], d.time_share[2], d.time_share[3],
               d.working_share[0], d.working_share[1], d.working_share[2], d.working_share[3], d.energy_j,
               d.lifetime_h);
}

void write_device_summary_csv(std::ostream& out, const std::vector<DeviceSummary>& devices) {
  out << "device,type";
  for (const char* prefix : {"time_", "working_time_", "energy_"})
    for (auto m : kAllModes) out << ',' << prefix << to_string(m);
  out << ",energy_j,lifetime_hours\n";
  for (const auto& d : devices) {
    out << d.device << ',' << d.type;
    for (const auto* arr : {&d.time_share, &d.working_share, &d.energy_share})
      for (double v : *arr) out << ',' << fmt6(v);
    out << ',' << fmt6(d.energy_j) << ',' << fmt6(d.lifetime_h) << '\n';
  }
}

double SweepResult::spread() const noexcept {
  if (points.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const auto& a, const auto& b) { return a.lifetime_h < b.lifetime_h; });
  return hi->lifetime_h - lo->lifetime_h;
}

SweepPoint sweep_point(ReplicaCache& cache, std::string value, std::size_t replicas, unsigned jobs) {
  if (replicas < 1) throw ValidationError("replicas", "0", ">= 1");
  replicate_map(replicas, 0, jobs, [&](std::size_t i, std::uint64_t) { return cache.get(i).size(); });
  const auto idx = first_n(replicas);
  return SweepPoint{std::move(value), mean_floor_lifetime(cache, idx), summarize(cache, idx)};
}

SweepResult sweep(const Scenario& scenario, std::string_view parameter, const SweepOptions& options) {
  SweepResult result;
  result.parameter = std::string(parameter);
  const double horizon = options.horizon > 0 ? options.horizon : scenario.horizon_s;
  const std::uint64_t seed = options.seed.value_or(scenario.seed);
  for (const auto& value : sweep_values(parameter)) {
    EnergyConfig cfg = scenario.config;
    set_parameter(cfg, parameter, value);
    cfg.validate();
    const BuiltSystem built = build_system(scenario, cfg);
    ReplicaCache cache(built, horizon, seed);
    result.points.push_back(sweep_point(cache, value, options.replicas, options.jobs));
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "param_value,lifetime_hours\n";
  for (const auto& p : result.points) out << p.value << ',' << fmt6(p.lifetime_h) << '\n';
}

void write_sweep_modes_csv(std::ostream& out, const SweepResult& result) {
  out << "param_value,device,scope,LPM,CPU,Tx,Rx,lifetime_hours\n";
  for (const auto& p : result.points)
    for (const auto& d : p.devices)
      for (int scope = 0; scope < 2; ++scope) {
        const auto& s = scope == 0 ? d.time_share : d.working_share;
        out << p.value << ',' << d.device << ',' << (scope == 0 ? "whole-horizon" : "working-hours");
        for (double v : s) out << ',' << fmt6(v);
        out << ',' << fmt6(d.lifetime_h) << '\n';
      }
}

}  // namespace iesim
