#include <sstream>

#include "doctest.h"
#include "iesim/characterize.hpp"
#include "iesim/error.hpp"
#include "support.hpp"

using namespace iesim;

namespace {

// Alternates `mode` sojourns drawn from `dist` with 1 s LPM gaps, then ends
// with one LPM interval reaching the window end.
EnergyLedger alternating(std::string device, OperatingMode mode, const Distribution& dist, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  EnergyLedger l;
  l.device = std::move(device);
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = dist.sample(rng);
    l.intervals.push_back({mode, t, d});
    t += d;
    l.intervals.push_back({OperatingMode::LPM, t, 1.0});
    t += 1.0;
  }
  l.intervals.push_back({OperatingMode::LPM, t, 50.0});
  l.window = {0.0, t + 50.0};
  return l;
}

const ModeFit* find(const Characterization& c, std::string_view type, OperatingMode m) {
  for (const auto& f : c.fits)
    if (f.device_type == type && f.mode == m) return &f;
  return nullptr;
}

}  // namespace

TEST_SUITE("characterize") {

TEST_CASE("Tx prefers Poisson in quanta, constant LPM becomes Dirac") {
  const double q = 0.001;
  const auto l = alternating("a", OperatingMode::Tx, Distribution::poisson(40.0, q), 2000, 1);
  const auto c = characterize({l}, {{"a", "z1"}}, q);
  const auto* tx = find(c, "z1", OperatingMode::Tx);
  REQUIRE(tx != nullptr);
  CHECK(tx->report.kind == DistributionKind::Poisson);
  const auto& p = std::get<Poisson>(tx->report.fitted.params());
  CHECK(p.quantum == q);
  CHECK(p.lambda == doctest::Approx(40.0).epsilon(0.02));
  CHECK(tx->report.dof > 0);

  // the 50 s tail is cut by the window end and left out
  const auto* lpm = find(c, "z1", OperatingMode::LPM);
  REQUIRE(lpm != nullptr);
  CHECK(lpm->report.kind == DistributionKind::Dirac);
  CHECK(lpm->report.fitted == Distribution::dirac(1.0));
  CHECK(lpm->report.samples == 2000);
  CHECK(c.timing.at("z1").at(OperatingMode::Tx) == tx->report.fitted);
}

TEST_CASE("Rx prefers Normal") {
  const auto l = alternating("b", OperatingMode::Rx, Distribution::normal(0.2, 0.02), 1000, 2);
  const auto c = characterize({l}, {}, 0.001);
  const auto* rx = find(c, "b", OperatingMode::Rx);  // ungrouped device: its own type
  REQUIRE(rx != nullptr);
  CHECK(rx->report.kind == DistributionKind::Normal);
  const auto& n = std::get<Normal>(rx->report.fitted.params());
  CHECK(n.mean == doctest::Approx(0.2).epsilon(0.02));
  CHECK(n.stddev == doctest::Approx(0.02).epsilon(0.1));
  CHECK(rx->note.empty());
}

TEST_CASE("falls back when the preferred estimator rejects the data") {
  // every Tx sojourn is below half a quantum, so all counts round to zero
  const auto l = alternating("a", OperatingMode::Tx, Distribution::uniform(1e-5, 4e-4), 200, 3);
  const auto c = characterize({l}, {}, 0.001);
  const auto* tx = find(c, "a", OperatingMode::Tx);
  REQUIRE(tx != nullptr);
  CHECK(tx->report.kind == DistributionKind::Normal);
  CHECK(tx->note.find("poisson rejected") != std::string::npos);
}

TEST_CASE("devices of one type are pooled") {
  const auto a = alternating("a", OperatingMode::CPU, Distribution::poisson(30.0, 0.001), 300, 4);
  const auto b = alternating("b", OperatingMode::CPU, Distribution::poisson(30.0, 0.001), 500, 5);
  const auto c = characterize({a, b}, {{"a", "t"}, {"b", "t"}}, 0.001);
  const auto* cpu = find(c, "t", OperatingMode::CPU);
  REQUIRE(cpu != nullptr);
  CHECK(cpu->report.samples == 800);
  CHECK(c.timing.size() == 1);
}

TEST_CASE("fit csv and errors") {
  const auto l = alternating("a", OperatingMode::Rx, Distribution::normal(0.2, 0.02), 50, 6);
  const auto c = characterize({l}, {}, 0.001);
  std::ostringstream os;
  write_fit_csv(os, c);
  CHECK(os.str().rfind("device_type,mode,kind,distribution,samples,chi_square,dof,note\n", 0) == 0);
  CHECK(os.str().find("a,Rx,normal,") != std::string::npos);
  CHECK_THROWS_AS(characterize({l}, {}, 0.0), ValidationError);
}

}  // TEST_SUITE
