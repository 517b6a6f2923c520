#include "iesim/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

namespace {

bool prefers_poisson(OperatingMode m) { return m == OperatingMode::Tx || m == OperatingMode::CPU; }

FitReport try_fit(DistributionKind kind, const std::vector<double>& durations, double quantum) {
  std::vector<double> data = durations;
  if (kind == DistributionKind::Poisson)
    for (double& d : data) d = std::round(d / quantum);
  FitReport r = fit(kind, data);
  if (kind == DistributionKind::Poisson) r.fitted = Distribution::poisson(std::get<Poisson>(r.fitted.params()).lambda, quantum);
  if (data.size() >= kMinSelectSamples) {
    // Statistic on the fitted data itself, so the Poisson one is in counts.
    const Distribution on_data =
        kind == DistributionKind::Poisson ? Distribution::poisson(std::get<Poisson>(r.fitted.params()).lambda) : r.fitted;
    try {
      const auto cs = chi_square_statistic(data, on_data, kind == DistributionKind::Normal ? 2 : 1);
      r.chi_square = cs.statistic;
      r.dof = cs.dof;
    } catch (const FitError&) {
      // all counts equal after rounding; leave the statistic empty
    }
  }
  return r;
}

}  // namespace

Characterization characterize(const std::vector<EnergyLedger>& ledgers,
                              const std::map<std::string, std::string, std::less<>>& type_of, double quantum) {
  if (!(quantum > 0)) throw ValidationError("quantum", fmt::format("{}", quantum), "> 0");
  std::map<std::string, std::map<OperatingMode, std::vector<double>>> groups;
  for (const auto& ledger : ledgers) {
    const auto it = type_of.find(ledger.device);
    const std::string& type = it == type_of.end() ? ledger.device : it->second;
    for (const auto& iv : ledger.intervals) {
      // The last interval of a device is cut by the horizon, so it is not a sojourn.
      if (iv.duration <= 0 || iv.end() >= ledger.window.end) continue;
      groups[type][iv.mode].push_back(iv.duration);
    }
  }

  Characterization out;
  for (const auto& [type, modes] : groups) {
    for (const auto& [mode, durations] : modes) {
      ModeFit mf{type, mode, {}, {}};
      const double first = durations.front();
      const bool constant =
          std::all_of(durations.begin(), durations.end(), [&](double d) { return d == first; });
      if (constant) {
        mf.report = FitReport{DistributionKind::Dirac, Distribution::dirac(first), durations.size(), 0.0, 0};
        mf.note = "constant data";
      } else if (durations.size() < 2) {
        continue;
      } else {
        const DistributionKind preferred = prefers_poisson(mode) ? DistributionKind::Poisson : DistributionKind::Normal;
        const DistributionKind fallback = prefers_poisson(mode) ? DistributionKind::Normal : DistributionKind::Poisson;
        try {
          mf.report = try_fit(preferred, durations, quantum);
        } catch (const FitError& e) {
          mf.note = fmt::format("{} rejected: {}", to_string(preferred), e.what());
          mf.report = try_fit(fallback, durations, quantum);
        }
      }
      out.timing[type][mode] = mf.report.fitted;
      out.fits.push_back(std::move(mf));
    }
  }
  return out;
}

void write_fit_csv(std::ostream& out, const Characterization& c) {
  out << "device_type,mode,kind,distribution,samples,chi_square,dof,note\n";
  for (const auto& f : c.fits)
    out << f.device_type << ',' << to_string(f.mode) << ',' << to_string(f.report.kind) << ",\""
        << f.report.fitted.describe() << "\"," << f.report.samples << ',' << fmt::format("{:.6f}", f.report.chi_square)
        << ',' << f.report.dof << ",\"" << f.note << "\"\n";
}

}  // namespace iesim
