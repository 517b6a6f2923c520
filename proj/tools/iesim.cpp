#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "iesim/characterize.hpp"
#include "iesim/config.hpp"
#include "iesim/error.hpp"
#include "iesim/requirements.hpp"
#include "iesim/scenario.hpp"
#include "iesim/units.hpp"

namespace fs = std::filesystem;
using namespace iesim;

namespace {

enum Exit { kOk = 0, kViolated = 1, kUsage = 2, kRuntime = 3 };

struct Common {
  std::string scenario;
  std::string seed;
  std::string horizon;
  std::string out = ".";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, Common& c, bool with_scenario = true) {
  if (with_scenario) cmd->add_option("--scenario", c.scenario, "Scenario XML")->required();
  cmd->add_option("--seed", c.seed, "Root seed (default: IESIM_SEED, then the scenario seed)");
  cmd->add_option("--horizon", c.horizon, "Simulated time, <int><s|m|h|d|w>");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || p != end) throw ValidationError(what, text, "unsigned 64-bit integer");
  return v;
}

std::uint64_t resolve_seed(const Common& c, const Scenario& s) {
  if (!c.seed.empty()) return parse_seed(c.seed, "seed");
  if (const char* env = std::getenv("IESIM_SEED"); env && *env) return parse_seed(env, "IESIM_SEED");
  return s.seed;
}

double resolve_horizon(const Common& c, const Scenario& s) {
  if (c.horizon.empty()) return s.horizon_s;
  const double h = parse_duration(c.horizon);
  if (!(h > 0)) throw ValidationError("horizon", c.horizon, "a positive duration");
  return h;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", (dir / name).string()));
  return f;
}

bool looks_like_scenario(const std::string& text) { return text.find("<scenario") != std::string::npos; }

int cmd_validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path", path, "a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (looks_like_scenario(text)) {
    const Scenario s = parse_scenario(text);
    build_system(s);  // catches wiring problems the schema cannot
    fmt::print("{}: valid scenario '{}' ({} floors, {})\n", path, s.name, s.topology.floors.size(),
               to_string(s.config.rdc_protocol));
  } else {
    const EnergyConfig cfg = parse_config(text);
    fmt::print("{}: valid energy configuration ({})\n", path, to_string(cfg.rdc_protocol));
  }
  return kOk;
}

int cmd_simulate(const Common& c) {
  const Scenario s = load_scenario(c.scenario);
  const double horizon = resolve_horizon(c, s);
  const std::uint64_t seed = resolve_seed(c, s);
  const BuiltSystem built = build_system(s);
  const fs::path out = c.out;
  Trace trace;
  try {
    trace = run(built.model, horizon, seed);
  } catch (const DeadlockError& e) {
    auto f = open_out(out, "deadlock.txt");
    f << e.what() << '\n' << e.snapshot();
    throw;
  }
  {
    auto f = open_out(out, "trace.csv");
    write_trace_csv(f, trace);
  }
  {
    auto f = open_out(out, "powertrace.csv");
    write_powertrace_csv(f, trace, powertrace_log(trace, s.powertrace));
  }
  auto f = open_out(out, "summary.csv");
  f << "device,type";
  for (const char* prefix : {"time_", "energy_"})
    for (auto m : kAllModes) f << ',' << prefix << to_string(m);
  f << ",energy_j,lifetime_hours\n";
  for (std::size_t i = 0; i < built.devices.size(); ++i) {
    const auto& d = built.devices[i];
    const EnergyLedger& ledger = trace.ledger(d.id);
    const DeviceProfile& prof = built.profile_of(d.id);
    f << d.id << ',' << d.type;
    for (auto m : kAllModes) f << fmt::format(",{:.6f}", duty_cycle_time(ledger, m));
    for (auto m : kAllModes) f << fmt::format(",{:.6f}", duty_cycle_energy(ledger, prof, m));
    f << fmt::format(",{:.6f},{:.6f}\n", total_energy(ledger, prof), lifetime_hours(prof, ledger));
  }
  fmt::print("simulated {} devices over {} (seed {}); wrote trace.csv, powertrace.csv, summary.csv to {}\n",
             built.devices.size(), format_duration(horizon), seed, out.string());
  return kOk;
}

int cmd_fit(const std::string& trace_path, const Common& c) {
  std::ifstream in(trace_path);
  if (!in) throw ValidationError("trace", trace_path, "a readable file");
  std::map<std::string, std::string, std::less<>> type_of;
  double quantum = CalibrationSet::shipped().quantum_s;
  double horizon = 0.0;
  if (!c.scenario.empty()) {
    const Scenario s = load_scenario(c.scenario);
    const Topology topo = build_bms_topology(s.topology, [&] {
      std::set<std::string, std::less<>> known;
      for (const auto& [name, p] : s.profiles) known.insert(name);
      return known;
    }());
    for (const auto& d : topo.devices) type_of[d.id] = d.type;
    quantum = s.calibration.quantum_s;
  }
  if (!c.horizon.empty()) horizon = parse_duration(c.horizon);
  const auto ledgers = read_trace_csv(in, horizon);
  const Characterization ch = characterize(ledgers, type_of, quantum);
  const fs::path out = c.out;
  {
    auto f = open_out(out, "fit.csv");
    write_fit_csv(f, ch);
  }
  auto f = open_out(out, "fitted-timing.xml");
  f << render_fitted_timing(ch.timing);
  for (const auto& m : ch.fits)
    fmt::print("{:<12} {:<4} {:<40} n={:<7} chi2={:.4g}{}\n", m.device_type, to_string(m.mode), m.report.fitted.describe(),
               m.report.samples, m.report.chi_square, m.note.empty() ? "" : "  (" + m.note + ")");
  return kOk;
}

struct VerifyArgs {
  std::string requirements;
  std::vector<std::string> ids;
  std::string method;
  std::optional<double> alpha, beta, theta, delta;
  std::vector<double> indifference;
  std::optional<std::size_t> max_samples;
};

int cmd_verify(const Common& c, const VerifyArgs& a) {
  Scenario s = load_scenario(c.scenario);
  RequirementSet reqs = load_requirements(a.requirements);
  if (!a.ids.empty()) reqs = reqs.select(a.ids);
  SmcOverrides o;
  if (!a.method.empty()) o.method = parse_smc_method(a.method);
  o.alpha = a.alpha;
  o.beta = a.beta;
  o.theta = a.theta;
  o.delta = a.delta;
  o.max_samples = a.max_samples;
  if (!a.indifference.empty()) {
    o.p1 = a.indifference.at(0);
    o.p0 = a.indifference.at(1);
  }
  reqs.override_smc(o);
  VerifyOptions opt;
  opt.horizon = resolve_horizon(c, s);
  opt.seed = resolve_seed(c, s);
  opt.jobs = c.jobs;
  const VerificationReport report = verify_requirements(s, reqs, opt);
  write_report_table(std::cout, report);
  const fs::path out = c.out;
  {
    auto f = open_out(out, "verdicts.csv");
    write_report_csv(f, report);
  }
  auto f = open_out(out, "devices.csv");
  write_device_summary_csv(f, report.devices);
  return report.all_hold() ? kOk : kViolated;
}

int cmd_sweep(const Common& c, const std::string& parameter, std::size_t replicas) {
  const Scenario s = load_scenario(c.scenario);
  sweep_values(parameter);  // rejects unknown names before any simulation
  SweepOptions opt;
  opt.horizon = resolve_horizon(c, s);
  opt.seed = resolve_seed(c, s);
  opt.replicas = replicas;
  opt.jobs = c.jobs;
  const SweepResult r = sweep(s, parameter, opt);
  for (const auto& p : r.points) fmt::print("{:<12} {:>10.2f} h\n", p.value, p.lifetime_h);
  fmt::print("spread {:.2f} h\n", r.spread());
  const fs::path out = c.out;
  {
    auto f = open_out(out, fmt::format("sweep-{}.csv", parameter));
    write_sweep_csv(f, r);
  }
  auto f = open_out(out, fmt::format("sweep-{}-modes.csv", parameter));
  write_sweep_modes_csv(f, r);
  return kOk;
}

int cmd_report(const Common& c, std::size_t replicas) {
  const Scenario s = load_scenario(c.scenario);
  const BuiltSystem built = build_system(s);
  ReplicaCache cache(built, resolve_horizon(c, s), resolve_seed(c, s));
  const SweepPoint p = sweep_point(cache, std::string(to_string(s.config.rdc_protocol)), replicas, c.jobs);
  VerificationReport report;
  report.scenario = s.name;
  report.config = s.config;
  report.horizon = cache.horizon();
  report.seed = cache.root_seed();
  report.replicas = replicas;
  report.devices = p.devices;
  write_report_table(std::cout, report);
  fmt::print("\nmean floor lifetime {:.2f} h\n", p.lifetime_h);
  auto f = open_out(c.out, "devices.csv");
  write_device_summary_csv(f, report.devices);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware IoT network simulator and statistical model checker"};
  app.require_subcommand(1, 1);

  Common common;
  std::string config_path, trace_path, parameter;
  std::size_t replicas = 4;
  VerifyArgs va;

  auto* validate = app.add_subcommand("validate-config", "Check a scenario or energy configuration file");
  validate->add_option("path", config_path, "XML file");
  validate->add_option("--scenario", config_path, "XML file (same as the positional argument)");

  auto* simulate = app.add_subcommand("simulate", "Run one replica and write trace, powertrace and summary CSVs");
  add_common(simulate, common);

  auto* fit = app.add_subcommand("fit", "Fit interval distributions per device type and mode from a trace CSV");
  fit->add_option("trace", trace_path, "Trace CSV written by simulate")->required();
  add_common(fit, common, false);
  fit->add_option("--scenario", common.scenario, "Scenario giving device types and the Poisson quantum");

  auto* verify = app.add_subcommand("verify", "Check requirements by statistical model checking");
  add_common(verify, common);
  verify->add_option("--requirements", va.requirements, "Requirements JSON")->required();
  verify->add_option("--requirement", va.ids, "Only these requirement ids");
  verify->add_option("--method", va.method, "estimate|sprt");
  verify->add_option("--alpha", va.alpha);
  verify->add_option("--beta", va.beta);
  verify->add_option("--theta", va.theta);
  verify->add_option("--delta", va.delta);
  verify->add_option("--indifference", va.indifference, "p1 p0")->expected(2);
  verify->add_option("--max-samples", va.max_samples);

  auto* sweep_cmd = app.add_subcommand("sweep", "Vary one energy parameter over its range");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--parameter", parameter, "rdc-protocol|rdc-frequency|retransmissions|service-protocol|"
                                                  "header-size|interference")
      ->required();
  sweep_cmd->add_option("--replicas", replicas, "Replicas per value")->capture_default_str()->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Per-device duty cycles and lifetimes over replicas");
  add_common(report, common);
  report->add_option("--replicas", replicas, "Replicas")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) {
      if (config_path.empty()) throw ValidationError("path", "", "a configuration file");
      return cmd_validate(config_path);
    }
    if (*simulate) return cmd_simulate(common);
    if (*fit) return cmd_fit(trace_path, common);
    if (*verify) return cmd_verify(common, va);
    if (*sweep_cmd) return cmd_sweep(common, parameter, replicas);
    if (*report) return cmd_report(common, replicas);
  } catch (const ValidationError& e) {
    fmt::print(std::cerr, "iesim: {}\n", e.what());
    return kUsage;
  } catch (const DeadlockError& e) {
    fmt::print(std::cerr, "iesim: {}\n{}\n", e.what(), e.snapshot());
    return kRuntime;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "iesim: {}\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
