#include "iesim/smc.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

namespace {

std::string fmt_g(double v) { return fmt::format("{}", v); }

// Outcomes of samples [first, first + count), evaluated on up to `jobs` threads.
std::vector<char> draw(const Sampler& sampler, std::size_t first, std::size_t count, unsigned jobs) {
  return replicate_map(count, 0, jobs, [&](std::size_t i, std::uint64_t) -> char { return sampler(first + i) ? 1 : 0; });
}

std::size_t batch_size(unsigned jobs) { return jobs <= 1 ? 1 : std::size_t{jobs} * 4; }

}  // namespace

std::string_view to_string(PropertyKind kind) noexcept {
  switch (kind) {
    case PropertyKind::LifetimeAtLeast: return "lifetime_at_least";
    case PropertyKind::ModeTimeshareAtLeast: return "mode_timeshare_at_least";
    case PropertyKind::ModeTimeshareAtMost: return "mode_timeshare_at_most";
  }
  return "?";
}

std::string_view to_string(Scope scope) noexcept {
  return scope == Scope::WholeHorizon ? "whole-horizon" : "working-hours";
}

std::string_view to_string(ShareKind share) noexcept { return share == ShareKind::Time ? "time" : "energy"; }

PropertyKind parse_property_kind(std::string_view text) {
  for (auto k : {PropertyKind::LifetimeAtLeast, PropertyKind::ModeTimeshareAtLeast, PropertyKind::ModeTimeshareAtMost})
    if (text == to_string(k)) return k;
  throw ValidationError("type", std::string(text), "lifetime_at_least|mode_timeshare_at_least|mode_timeshare_at_most");
}

Scope parse_scope(std::string_view text) {
  for (auto s : {Scope::WholeHorizon, Scope::WorkingHours})
    if (text == to_string(s)) return s;
  throw ValidationError("scope", std::string(text), "whole-horizon|working-hours");
}

ShareKind parse_share_kind(std::string_view text) {
  for (auto s : {ShareKind::Time, ShareKind::Energy})
    if (text == to_string(s)) return s;
  throw ValidationError("share", std::string(text), "time|energy");
}

void Property::validate() const {
  if (kind == PropertyKind::LifetimeAtLeast) {
    if (!(threshold > 0) || !std::isfinite(threshold))
      throw ValidationError("threshold", fmt_g(threshold), "hours > 0");
  } else if (!(threshold >= 0 && threshold <= 1)) {
    throw ValidationError("threshold", fmt_g(threshold), "ratio in [0, 1]");
  }
}

std::string Property::describe() const {
  if (kind == PropertyKind::LifetimeAtLeast) return fmt::format("lf >= {} h ({})", threshold, to_string(scope));
  return fmt::format("D_{}{} {} {} ({})", to_string(mode), share == ShareKind::Energy ? "[energy]" : "",
                     kind == PropertyKind::ModeTimeshareAtLeast ? ">=" : "<=", threshold, to_string(scope));
}

bool evaluate(const Property& property, const DeviceUsage& usage, const DeviceProfile& profile) {
  const ModeTotals& t = property.scope == Scope::WholeHorizon ? usage.whole : usage.working;
  if (!(t.window > 0))
    throw Error(fmt::format("property {}: {} window of device {} is empty", property.id, to_string(property.scope),
                            usage.device));
  if (property.kind == PropertyKind::LifetimeAtLeast) return t.lifetime_hours(profile) >= property.threshold;
  const double share = property.share == ShareKind::Time ? t.duty_cycle_time(property.mode)
                                                         : t.duty_cycle_energy(profile, property.mode);
  return property.kind == PropertyKind::ModeTimeshareAtLeast ? share >= property.threshold
                                                             : share <= property.threshold;
}

bool evaluate(const Property& property, const EnergyLedger& ledger, const DeviceProfile& profile, double work_start_h,
              double work_end_h) {
  return evaluate(property, usage_from_ledger(ledger, work_start_h, work_end_h), profile);
}

void SmcConfig::validate() const {
  if (!(alpha > 0 && alpha < 0.5)) throw ValidationError("alpha", fmt_g(alpha), "(0, 0.5)");
  if (!(beta > 0 && beta < 0.5)) throw ValidationError("beta", fmt_g(beta), "(0, 0.5)");
  if (!(p1 >= 0 && p1 <= theta && theta <= p0 && p0 <= 1))
    throw ValidationError("indifference", fmt::format("p1={} theta={} p0={}", p1, theta, p0), "0 <= p1 <= theta <= p0 <= 1");
  if (!(delta > 0 && delta < 1)) throw ValidationError("delta", fmt_g(delta), "(0, 1)");
  if (max_samples < 1) throw ValidationError("max-samples", std::to_string(max_samples), ">= 1");
}

std::string_view to_string(VerdictKind kind) noexcept {
  switch (kind) {
    case VerdictKind::AcceptH0: return "AcceptH0";
    case VerdictKind::AcceptH1: return "AcceptH1";
    case VerdictKind::Estimate: return "Estimate";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

bool Verdict::holds() const noexcept {
  if (kind == VerdictKind::AcceptH0) return true;
  if (kind == VerdictKind::Estimate) return p_hat >= config.theta;
  return false;
}

std::size_t chernoff_sample_size(double delta, double alpha) {
  if (!(delta > 0 && delta < 1)) throw ValidationError("delta", fmt_g(delta), "(0, 1)");
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("alpha", fmt_g(alpha), "(0, 1)");
  return static_cast<std::size_t>(std::ceil(std::log(2.0 / alpha) / (2.0 * delta * delta)));
}

Verdict sprt(const Sampler& sampler, const SmcConfig& config, unsigned jobs) {
  config.validate();
  if (!(config.p1 < config.p0))
    throw ValidationError("indifference", fmt::format("p1={} p0={}", config.p1, config.p0), "p1 < p0");
  const double accept_h1 = std::log((1 - config.beta) / config.alpha);
  const double accept_h0 = std::log(config.beta / (1 - config.alpha));
  // Log-likelihood ratio of p1 against p0 per outcome.
  const double on_success = std::log(config.p1 / config.p0);
  const double on_failure = std::log((1 - config.p1) / (1 - config.p0));

  Verdict v;
  v.config = config;
  v.kind = VerdictKind::Inconclusive;
  double llr = 0.0;
  const std::size_t batch = batch_size(jobs);
  while (v.samples < config.max_samples) {
    const std::size_t count = std::min(batch, config.max_samples - v.samples);
    const auto outcomes = draw(sampler, v.samples, count, jobs);
    for (char ok : outcomes) {
      ++v.samples;
      v.successes += ok ? 1 : 0;
      llr += ok ? on_success : on_failure;
      if (llr >= accept_h1) v.kind = VerdictKind::AcceptH1;
      else if (llr <= accept_h0) v.kind = VerdictKind::AcceptH0;
      if (v.kind != VerdictKind::Inconclusive) break;
    }
    if (v.kind != VerdictKind::Inconclusive) break;
  }
  v.p_hat = static_cast<double>(v.successes) / static_cast<double>(v.samples);
  return v;
}

Verdict estimate(const Sampler& sampler, const SmcConfig& config, unsigned jobs) {
  config.validate();
  Verdict v;
  v.config = config;
  v.kind = VerdictKind::Estimate;
  v.samples = chernoff_sample_size(config.delta, config.alpha);
  for (char ok : draw(sampler, 0, v.samples, jobs)) v.successes += ok ? 1 : 0;
  v.p_hat = static_cast<double>(v.successes) / static_cast<double>(v.samples);
  return v;
}

Verdict estimate(const Sampler& sampler, double delta, double alpha, unsigned jobs) {
  SmcConfig cfg;
  cfg.delta = delta;
  cfg.alpha = alpha;
  return estimate(sampler, cfg, jobs);
}

}  // namespace iesim
