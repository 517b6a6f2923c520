#include <algorithm>

#include "doctest.h"
#include "iesim/calibration.hpp"
#include "iesim/energy_automaton.hpp"
#include "iesim/engine.hpp"
#include "iesim/error.hpp"
#include "iesim/model.hpp"
#include "support.hpp"

using namespace iesim;

namespace {

ModeTimingModel xmac_timing() { return effect_model(EnergyConfig{}, "zolertia-z1", CalibrationSet::shipped()); }

// a --go--> b on an exported label, with a fixed delay.
AtomicComponent two_state(std::string name, double delay, bool exported = true, std::string label = "go") {
  AtomicComponent c(std::move(name));
  const auto a = c.add_location("A", OperatingMode::LPM);
  const auto b = c.add_location("B", OperatingMode::CPU);
  c.set_initial(a);
  c.add_transition({label, a, b, {}, Distribution::dirac(delay), exported, {}, {}});
  c.add_transition({label + "Back", b, a, {}, Distribution::dirac(delay), exported, {}, {}});
  return c;
}

struct Recorder : ExecutionObserver {
  std::vector<std::pair<Step, double>> steps;
  double lpm = 0, other = 0;
  void on_interval(std::size_t, OperatingMode m, double s, double e) override {
    (m == OperatingMode::LPM ? lpm : other) += e - s;
  }
  void on_step(const Step& s, double t) override { steps.emplace_back(s, t); }
};

}  // namespace

TEST_SUITE("model") {

TEST_CASE("energy automaton shape") {
  const auto c = build_energy_automaton(test::profile(1e-4, 0.0018, 0.017, 0.02), xmac_timing(), {}, "n");
  CHECK(c.locations().size() == 5);
  for (const char* loc : {"Off", "LPM", "CPU", "Tx", "Rx"}) CHECK(c.find_location(loc).has_value());
  CHECK(c.exported_labels() == std::vector<std::string>{"sndPacket", "recv", "tick"});
  CHECK(c.locations()[c.initial()].name == "Off");
  CHECK_NOTHROW(c.validate());

  AutomatonOptions dc;
  dc.duty_cycle_arcs = true;
  const auto d = build_energy_automaton(test::profile(1e-4, 0.0018, 0.017, 0.02), xmac_timing(), dc, "n");
  for (auto arc : kDutyCycleArcs)
    CHECK(std::any_of(d.transitions().begin(), d.transitions().end(), [&](const Transition& t) { return t.label == arc; }));
}

TEST_CASE("missing arc durations are reported by name") {
  auto timing = xmac_timing();
  timing.arcs.erase("process");
  CHECK_THROWS_WITH_AS(build_energy_automaton(test::profile(1e-4, 0.0018, 0.017, 0.02), timing), doctest::Contains("process"),
                       ModelError);
}

TEST_CASE("an isolated automaton activates and stays in LPM") {
  SystemModel m;
  m.add_component(build_energy_automaton(test::profile(1e-4, 0.0018, 0.017, 0.02), xmac_timing(), {}, "n"));
  m.finalize();
  Recorder r;
  run(m, 100.0, 1, r, /*allow_quiescence=*/true);
  CHECK(r.other == 0.0);
  CHECK(r.lpm > 99.0);
  CHECK(r.lpm <= 100.0);

  SystemModel strict;
  strict.add_component(build_energy_automaton(test::profile(1e-4, 0.0018, 0.017, 0.02), xmac_timing(), {}, "n"));
  strict.finalize();
  Recorder r2;
  CHECK_THROWS_AS(run(strict, 100.0, 1, r2, false), DeadlockError);
}

TEST_CASE("enabled_interactions") {
  SystemModel m;
  m.add_component(two_state("a", 1.0));
  m.add_component(two_state("b", 1.0));
  auto c = two_state("c", 1.0);
  m.add_component(c);
  const auto ab = m.connect("ab", {{"a", "go"}, {"b", "go"}});
  const auto abc_back = m.connect("back", {{"a", "goBack"}, {"b", "goBack"}});
  m.finalize();
  Rng rng = make_rng(1);
  auto s = initial_state(m, rng);
  CHECK(enabled_interactions(m, s) == std::vector<std::size_t>{ab});

  auto fired = fire(m, s, Step::interaction(ab), rng);
  CHECK(fired.elapsed == 1.0);
  CHECK(enabled_interactions(m, fired.state) == std::vector<std::size_t>{abc_back});
  CHECK_THROWS_AS(fire(m, fired.state, Step::interaction(ab), rng), std::logic_error);
}

TEST_CASE("an interaction waits for its slowest participant") {
  SystemModel m;
  m.add_component(two_state("fast", 0.2));
  m.add_component(two_state("slow", 0.7));
  const auto i = m.connect("sync", {{"fast", "go"}, {"slow", "go"}});
  m.finalize();
  Rng rng = make_rng(3);
  const auto s = initial_state(m, rng);
  CHECK(ready_time(m, s, Step::interaction(i)) == 0.7);
  CHECK(fire(m, s, Step::interaction(i), rng).elapsed == 0.7);
}

TEST_CASE("internal step elapsed time") {
  SystemModel m;
  m.add_component(two_state("solo", 0.5, false));
  m.finalize();
  Rng rng = make_rng(1);
  const auto s = initial_state(m, rng);
  const auto steps = enabled_internal(m, s);
  REQUIRE(steps.size() == 1);
  const auto r = fire(m, s, steps[0], rng);
  CHECK(r.elapsed == 0.5);
  CHECK(r.state.now == 0.5);
  CHECK(m.component(0).locations()[r.state.components[0].location].name == "B");
}

TEST_CASE("priority filter") {
  SystemModel m;
  m.add_component(two_state("a", 1.0));
  m.add_component(two_state("b", 1.0));
  m.add_component(two_state("c", 1.0));
  const auto low = m.connect("ab", {{"a", "go"}, {"b", "go"}});
  const auto high = m.connect("ac", {{"a", "go"}, {"c", "go"}});
  const auto other = m.connect("bc", {{"b", "go"}, {"c", "go"}});
  m.add_priority(high, low);
  m.finalize();
  Rng rng = make_rng(1);
  const auto s = initial_state(m, rng);
  const auto en = enabled_interactions(m, s);
  CHECK(std::find(en.begin(), en.end(), low) == en.end());
  CHECK(std::find(en.begin(), en.end(), high) != en.end());
  CHECK(std::find(en.begin(), en.end(), other) != en.end());
  CHECK_THROWS_AS(fire(m, s, Step::interaction(low), rng), std::logic_error);
}

TEST_CASE("structural errors") {
  SUBCASE("priority cycle") {
    SystemModel m;
    m.add_component(two_state("a", 1.0));
    m.add_component(two_state("b", 1.0));
    const auto x = m.connect("x", {{"a", "go"}, {"b", "go"}});
    const auto y = m.connect("y", {{"a", "goBack"}, {"b", "goBack"}});
    m.add_priority(x, y);
    m.add_priority(y, x);
    CHECK_THROWS_WITH_AS(m.finalize(), doctest::Contains("cycle"), ModelError);
  }
  SUBCASE("port on a non-exported label") {
    SystemModel m;
    m.add_component(two_state("a", 1.0, false));
    m.add_component(two_state("b", 1.0));
    m.connect("x", {{"a", "go"}, {"b", "go"}});
    CHECK_THROWS_WITH_AS(m.finalize(), doctest::Contains("not exported"), ModelError);
  }
  SUBCASE("unknown label") {
    SystemModel m;
    m.add_component(two_state("a", 1.0));
    m.add_component(two_state("b", 1.0));
    m.connect("x", {{"a", "jump"}, {"b", "go"}});
    CHECK_THROWS_AS(m.finalize(), ModelError);
  }
  SUBCASE("duplicate ids") {
    SystemModel m;
    m.add_component(two_state("a", 1.0));
    m.add_component(two_state("a", 1.0));
    CHECK_THROWS_WITH_AS(m.finalize(), doctest::Contains("duplicate"), ModelError);
  }
  SUBCASE("unknown component") {
    SystemModel m;
    m.add_component(two_state("a", 1.0));
    CHECK_THROWS_AS(m.connect("x", {{"a", "go"}, {"zz", "go"}}), ModelError);
  }
}

TEST_CASE("same seed, same run") {
  auto build = [] {
    SystemModel m;
    AtomicComponent a("a");
    const auto x = a.add_location("X", OperatingMode::LPM);
    const auto y = a.add_location("Y", OperatingMode::Rx);
    a.set_initial(x);
    a.add_transition({"up", x, y, {}, Distribution::exponential(2.0), false, {}, {}});
    a.add_transition({"down", y, x, {}, Distribution::normal(0.3, 0.1), false, {}, {}});
    a.add_transition({"flip", x, x, {}, Distribution::uniform(0.1, 0.9), false, {}, {}});
    m.add_component(std::move(a));
    m.finalize();
    return m;
  };
  const auto m = build();
  Recorder r1, r2, r3;
  run(m, 500.0, 9, r1);
  run(m, 500.0, 9, r2);
  run(m, 500.0, 10, r3);
  REQUIRE(r1.steps.size() == r2.steps.size());
  for (std::size_t i = 0; i < r1.steps.size(); ++i) {
    CHECK(r1.steps[i].first == r2.steps[i].first);
    CHECK(r1.steps[i].second == r2.steps[i].second);
  }
  CHECK(r1.lpm != r3.lpm);
}

TEST_CASE("composed system: every device occupies exactly one mode at a time") {
  const auto sys = build_system(test::shipped());
  const auto trace = run(sys.model, 2 * 3600.0, 5);
  for (const auto& l : trace.ledgers) {
    CHECK_NOTHROW(l.validate());
    double t = 0.0;
    for (const auto& iv : l.intervals) {
      CHECK(iv.start >= t - 1e-9);
      t = iv.start + iv.duration;
    }
  }
}

}  // TEST_SUITE
