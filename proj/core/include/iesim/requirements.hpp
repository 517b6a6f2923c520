#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iesim/scenario.hpp"
#include "iesim/smc.hpp"

namespace iesim {

enum class SmcMethod { Estimate, Sprt };
std::string_view to_string(SmcMethod method) noexcept;
SmcMethod parse_smc_method(std::string_view text);

// Unset fields leave the underlying value alone.
struct SmcOverrides {
  std::optional<SmcMethod> method;
  std::optional<double> alpha, beta, theta, p1, p0, delta;
  std::optional<std::size_t> max_samples;

  void apply(SmcMethod& m, SmcConfig& cfg) const;
};

struct Requirement {
  Property property;
  SmcMethod method = SmcMethod::Estimate;
  SmcConfig smc;
  // Devices a sample may pick from; empty means every floor device.
  std::vector<std::string> devices;
};

struct RequirementSet {
  std::vector<Requirement> items;

  const Requirement& find(std::string_view id) const;  // ValidationError when unknown
  // Keeps only the listed ids, in the given order.
  RequirementSet select(const std::vector<std::string>& ids) const;
  void override_smc(const SmcOverrides& overrides);
};

// JSON document: {"defaults": {...smc}, "requirements": [{id, type, threshold,
// mode, scope, share, devices, smc}]}. See docs/requirements-schema.md.
RequirementSet parse_requirements(std::string_view json);
RequirementSet load_requirements(const std::filesystem::path& path);

// Per-replica device usage, simulated on first use. Replica i runs with seed
// derive_seed(root_seed, i). Safe to share between threads.
class ReplicaCache {
 public:
  ReplicaCache(const BuiltSystem& system, double horizon, std::uint64_t root_seed);

  const std::vector<DeviceUsage>& get(std::size_t replica);
  // Indices simulated so far, ascending.
  std::vector<std::size_t> computed() const;
  const BuiltSystem& system() const noexcept { return *system_; }
  double horizon() const noexcept { return horizon_; }
  std::uint64_t root_seed() const noexcept { return root_seed_; }

 private:
  struct Slot {
    std::once_flag once;
    std::vector<DeviceUsage> usage;
  };
  const BuiltSystem* system_;
  double horizon_;
  std::uint64_t root_seed_;
  mutable std::mutex mutex_;
  std::map<std::size_t, std::unique_ptr<Slot>> slots_;
};

// Sample i: replica i plus one device drawn uniformly from `devices`.
Sampler make_sampler(ReplicaCache& cache, const Property& property, std::vector<std::string> devices);

struct DeviceSummary {
  std::string device;
  std::string type;
  std::array<double, kModeCount> time_share{};      // whole horizon
  std::array<double, kModeCount> working_share{};   // working hours
  std::array<double, kModeCount> energy_share{};    // whole horizon
  double energy_j = 0.0;
  double lifetime_h = 0.0;
};

// Means over the given replicas.
std::vector<DeviceSummary> summarize(ReplicaCache& cache, const std::vector<std::size_t>& replicas);
// Mean over replicas of the mean floor-device lifetime.
double mean_floor_lifetime(ReplicaCache& cache, const std::vector<std::size_t>& replicas);

struct RequirementResult {
  Requirement requirement;
  Verdict verdict;
};

struct VerificationReport {
  std::string scenario;
  EnergyConfig config;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<RequirementResult> results;
  std::vector<DeviceSummary> devices;  // over every replica drawn
  std::size_t replicas = 0;

  bool all_hold() const noexcept;
};

struct VerifyOptions {
  double horizon = 0.0;  // 0: scenario default
  std::optional<std::uint64_t> seed;  // unset: scenario seed
  unsigned jobs = 1;
};

VerificationReport verify_requirements(const Scenario& scenario, const RequirementSet& requirements,
                                       const VerifyOptions& options);
// Same, reusing (and filling) an existing cache.
VerificationReport verify_requirements(ReplicaCache& cache, const RequirementSet& requirements, unsigned jobs = 1);

void write_report_csv(std::ostream& out, const VerificationReport& report);  // requirement,verdict,p_hat,samples
void write_report_table(std::ostream& out, const VerificationReport& report);
void write_device_summary_csv(std::ostream& out, const std::vector<DeviceSummary>& devices);

struct SweepPoint {
  std::string value;
  double lifetime_h = 0.0;  // mean floor-device lifetime
  std::vector<DeviceSummary> devices;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;
  double spread() const noexcept;  // max - min lifetime
};

struct SweepOptions {
  double horizon = 0.0;  // 0: scenario default
  std::optional<std::uint64_t> seed;  // unset: scenario seed
  std::size_t replicas = 4;
  unsigned jobs = 1;
};

SweepPoint sweep_point(ReplicaCache& cache, std::string value, std::size_t replicas, unsigned jobs = 1);
// Varies one parameter over its full range, others as in the scenario.
SweepResult sweep(const Scenario& scenario, std::string_view parameter, const SweepOptions& options);

void write_sweep_csv(std::ostream& out, const SweepResult& result);        // param_value,lifetime_hours
void write_sweep_modes_csv(std::ostream& out, const SweepResult& result);  // per device and mode

}  // namespace iesim
