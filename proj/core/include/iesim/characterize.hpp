#pragma once

#include <map>
#include <string>
#include <vector>

#include "iesim/energy.hpp"
#include "iesim/fitting.hpp"
#include "iesim/scenario.hpp"

namespace iesim {

struct ModeFit {
  std::string device_type;
  OperatingMode mode = OperatingMode::LPM;
  FitReport report;
  std::string note;  // why the preferred kind was not used, if it was not
};

struct Characterization {
  FittedTiming timing;
  std::vector<ModeFit> fits;
};

// Fits interval durations per (device type, mode). Tx and CPU try Poisson
// first (counts of `quantum` seconds), Rx and LPM try Normal first; the other
// kind is the fallback and constant data becomes Dirac. Devices missing from
// `type_of` are grouped under their own id.
Characterization characterize(const std::vector<EnergyLedger>& ledgers,
                              const std::map<std::string, std::string, std::less<>>& type_of, double quantum);

void write_fit_csv(std::ostream& out, const Characterization& c);

}  // namespace iesim
