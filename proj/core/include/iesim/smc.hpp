#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include "iesim/energy.hpp"
#include "iesim/engine.hpp"

namespace iesim {

enum class PropertyKind { LifetimeAtLeast, ModeTimeshareAtLeast, ModeTimeshareAtMost };
enum class Scope { WholeHorizon, WorkingHours };
// Which duty-cycle reading a timeshare property uses.
enum class ShareKind { Time, Energy };

std::string_view to_string(PropertyKind kind) noexcept;
std::string_view to_string(Scope scope) noexcept;
std::string_view to_string(ShareKind share) noexcept;
PropertyKind parse_property_kind(std::string_view text);  // ValidationError
Scope parse_scope(std::string_view text);
ShareKind parse_share_kind(std::string_view text);

struct Property {
  std::string id;
  PropertyKind kind = PropertyKind::LifetimeAtLeast;
  double threshold = 0.0;  // hours for lifetime, a ratio otherwise
  OperatingMode mode = OperatingMode::LPM;
  Scope scope = Scope::WholeHorizon;
  ShareKind share = ShareKind::Time;

  void validate() const;
  std::string describe() const;
};

// Throws Error when the scope window is empty.
bool evaluate(const Property& property, const DeviceUsage& usage, const DeviceProfile& profile);
bool evaluate(const Property& property, const EnergyLedger& ledger, const DeviceProfile& profile,
              double work_start_h = 8.0, double work_end_h = 18.0);

struct SmcConfig {
  double alpha = 0.05;
  double beta = 0.05;
  double theta = 0.5;
  double p1 = 0.45;  // indifference region (p1, p0)
  double p0 = 0.55;
  double delta = 0.05;
  std::size_t max_samples = 100000;

  void validate() const;
};

enum class VerdictKind { AcceptH0, AcceptH1, Estimate, Inconclusive };
std::string_view to_string(VerdictKind kind) noexcept;

struct Verdict {
  VerdictKind kind = VerdictKind::Estimate;
  double p_hat = 0.0;  // success fraction of the samples drawn
  std::size_t samples = 0;
  std::size_t successes = 0;
  SmcConfig config;

  // H0 accepted, or an estimate at or above theta.
  bool holds() const noexcept;
};

// Outcome of sample i. Samples must be independent and depend only on i.
using Sampler = std::function<bool(std::size_t)>;

// ceil(ln(2 / alpha) / (2 delta^2)).
std::size_t chernoff_sample_size(double delta, double alpha);

// Wald's test of H0: p >= p0 against H1: p <= p1. With jobs > 1 samples are
// drawn in parallel batches but consumed in index order, so the verdict does
// not depend on the thread count.
Verdict sprt(const Sampler& sampler, const SmcConfig& config, unsigned jobs = 1);

// Fixed-size Chernoff-Hoeffding estimate; `config` supplies delta and alpha.
Verdict estimate(const Sampler& sampler, const SmcConfig& config, unsigned jobs = 1);
Verdict estimate(const Sampler& sampler, double delta, double alpha, unsigned jobs = 1);

}  // namespace iesim
