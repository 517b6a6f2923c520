#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "iesim/characterize.hpp"
#include "iesim/engine.hpp"
#include "iesim/error.hpp"
#include "iesim/scenario.hpp"
#include "support.hpp"

using namespace iesim;

namespace {

std::string csv(const Trace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

BuiltSystem solo_system(const FittedTiming& fitted = {}) {
  const auto& s = test::shipped();
  Topology solo;
  solo.devices.push_back({std::string(kManagerId), "zolertia-z1", DeviceRole::BuildingManager, 0, {}});
  return build_system(solo, s.config, s.calibration, s.profiles, s.workload, fitted);
}

const BuiltSystem& bms() {
  static const BuiltSystem sys = build_system(test::shipped());
  return sys;
}

double mean_lifetime(const Trace& t) {
  double sum = 0.0;
  for (const auto& l : t.ledgers) sum += lifetime_hours(bms().profile_of(l.device), l);
  return sum / static_cast<double>(t.ledgers.size());
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("horizon must be positive") {
  CHECK_THROWS_AS(run(bms().model, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(run(bms().model, -5.0, 1), ValidationError);
}

TEST_CASE("a quiescent device spends almost all its time in LPM") {
  const auto t = run(solo_system().model, 86400.0, 4);
  CHECK(duty_cycle_time(t.ledgers.at(0), OperatingMode::LPM) > 0.99);
}

TEST_CASE("same seed gives byte-identical traces") {
  const auto a = run(bms().model, 3 * 3600.0, 21);
  const auto b = run(bms().model, 3 * 3600.0, 21);
  const auto c = run(bms().model, 3 * 3600.0, 22);
  CHECK(csv(a) == csv(b));
  CHECK(csv(a) != csv(c));
  std::ostringstream pa, pb;
  write_powertrace_csv(pa, a, powertrace_log(a, test::shipped().powertrace));
  write_powertrace_csv(pb, b, powertrace_log(b, test::shipped().powertrace));
  CHECK(pa.str() == pb.str());
}

TEST_CASE("trace invariants") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const double horizon = 9.5 * 3600.0;  // ends inside working hours
    const auto t = run(bms().model, horizon, seed);
    CHECK(std::is_sorted(t.events.begin(), t.events.end(),
                         [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; }));
    for (const auto& l : t.ledgers) {
      double end = 0.0;
      for (const auto& iv : l.intervals) {
        CHECK(iv.start >= end - 1e-9);  // exclusivity
        CHECK(iv.duration >= 0.0);
        end = iv.start + iv.duration;
      }
      CHECK(end <= horizon + 1e-9);
      // tiling: after activation the device is always in some mode
      double covered = 0.0;
      for (const auto& iv : l.intervals) covered += iv.duration;
      CHECK(covered == doctest::Approx(horizon - l.intervals.front().start).epsilon(1e-9));
    }
  }
}

TEST_CASE("powertrace") {
  Trace t;
  t.horizon = 10.0;
  t.ledgers.push_back(EnergyLedger{"d", {{OperatingMode::LPM, 0.0, 10.0}}, {}, {0.0, 10.0}});
  const auto log = powertrace_log(t, PowertraceConfig{1.0, 32768.0});
  REQUIRE(log.size() == 10);
  CHECK(log.back().ticks[index(OperatingMode::LPM)] == 327680);
  for (auto m : {OperatingMode::CPU, OperatingMode::Tx, OperatingMode::Rx}) CHECK(log.back().ticks[index(m)] == 0);

  Trace empty;
  CHECK(powertrace_log(empty, PowertraceConfig{}).empty());

  const auto real = run(bms().model, 2 * 3600.0, 8);
  const PowertraceConfig cfg{1.0, 32768.0};
  const auto records = powertrace_log(real, cfg);
  std::vector<std::array<std::uint64_t, kModeCount>> last(real.ledgers.size());
  for (const auto& r : records) {
    std::uint64_t delta = 0;
    for (std::size_t m = 0; m < kModeCount; ++m) {
      CHECK(r.ticks[m] >= last[r.device][m]);
      delta += r.ticks[m] - last[r.device][m];
    }
    CHECK(delta <= static_cast<std::uint64_t>(cfg.period_s * cfg.rtimer_hz) + kModeCount);
    last[r.device] = r.ticks;
  }
}

TEST_CASE("replicate") {
  const double horizon = 3600.0;
  const auto one = replicate(bms().model, horizon, 1, 77);
  CHECK(csv(one.at(0)) == csv(run(bms().model, horizon, derive_seed(77, 0))));

  const auto seq = replicate(bms().model, horizon, 100, 5, 1, {false, false});
  const auto par = replicate(bms().model, horizon, 100, 5, 4, {false, false});
  double ms = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    ms += mean_lifetime(seq[i]);
    mp += mean_lifetime(par[i]);
  }
  CHECK(ms == mp);
  const auto again = replicate(bms().model, horizon, 100, 5, 2, {false, false});
  for (std::size_t i = 0; i < seq.size(); ++i) CHECK(csv(seq[i]) == csv(again[i]));
}

TEST_CASE("usage accumulator agrees with the recorded ledgers") {
  const double horizon = 86400.0;
  const auto t = run(bms().model, horizon, 12);
  UsageAccumulator acc(bms().model, horizon);
  run(bms().model, horizon, 12, acc);
  REQUIRE(acc.usage().size() == t.ledgers.size());
  for (std::size_t i = 0; i < t.ledgers.size(); ++i) {
    const auto u = usage_from_ledger(t.ledgers[i]);
    const auto& p = bms().profile_of(t.ledgers[i].device);
    CHECK(acc.usage()[i].device == t.ledgers[i].device);
    CHECK(acc.usage()[i].whole.lifetime_hours(p) == doctest::Approx(u.whole.lifetime_hours(p)).epsilon(1e-9));
    for (auto m : kAllModes)
      CHECK(acc.usage()[i].working.duty_cycle_time(m) == doctest::Approx(u.working.duty_cycle_time(m)).epsilon(1e-9));
  }
}

TEST_CASE("trace csv round trip") {
  const auto t = run(bms().model, 3600.0, 3);
  std::istringstream in(csv(t));
  const auto back = read_trace_csv(in, t.horizon);
  REQUIRE(back.size() == t.ledgers.size());
  for (const auto& l : back) {
    const auto& orig = t.ledger(l.device);
    REQUIRE(l.intervals.size() == orig.intervals.size());
    for (auto m : kAllModes)
      CHECK(duty_cycle_time(l, m) == doctest::Approx(duty_cycle_time(orig, m)).epsilon(1e-5));
  }
  std::istringstream bad("time_s,device,mode,duration_s\n1.0,d,Sleep,2.0\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ValidationError);
}

TEST_CASE("deadlock is reported with a state snapshot") {
  SystemModel m;
  AtomicComponent a("a");
  const auto x = a.add_location("X", OperatingMode::LPM);
  const auto y = a.add_location("Y", OperatingMode::Rx);
  a.set_initial(x);
  a.add_transition({"go", x, y, {}, Distribution::dirac(1.0), false, {}, {}});
  m.add_component(std::move(a));
  m.finalize();
  try {
    run(m, 10.0, 1);
    FAIL("no deadlock");
  } catch (const DeadlockError& e) {
    CHECK(e.time() == 1.0);
    CHECK(e.snapshot().find("a") != std::string::npos);
    CHECK(e.snapshot().find("Y") != std::string::npos);
  }
  const auto t = run(m, 10.0, 1, RunOptions{true, true});
  CHECK(duty_cycle_time(t.ledgers.at(0), OperatingMode::Rx) == doctest::Approx(0.9));
}

TEST_CASE("trace -> fit -> trace is stable on a homogeneous system") {
  const double horizon = 86400.0;
  const auto base = run(solo_system().model, horizon, 31);
  const auto& s = test::shipped();
  const auto ch = characterize(base.ledgers, {{std::string(kManagerId), "zolertia-z1"}}, s.calibration.quantum_s);
  const auto again = run(solo_system(ch.timing).model, horizon, 32);
  for (auto m : {OperatingMode::LPM, OperatingMode::Rx}) {
    const double a = duty_cycle_time(base.ledgers[0], m);
    const double b = duty_cycle_time(again.ledgers[0], m);
    CHECK(std::abs(b / a - 1.0) < 0.10);
  }
}

}  // TEST_SUITE
