#include <cmath>
#include <sstream>

#include "doctest.h"
#include "iesim/error.hpp"
#include "iesim/requirements.hpp"
#include "iesim/smc.hpp"
#include "support.hpp"

using namespace iesim;
using test::bernoulli_sampler;

namespace {

const Property kPhi1{"phi1", PropertyKind::LifetimeAtLeast, 168.0, OperatingMode::LPM, Scope::WholeHorizon, ShareKind::Time};
const Property kPhi2{"phi2", PropertyKind::ModeTimeshareAtLeast, 0.9, OperatingMode::LPM, Scope::WorkingHours,
                     ShareKind::Time};
const Property kPhi3{"phi3", PropertyKind::ModeTimeshareAtMost, 0.2, OperatingMode::Rx, Scope::WorkingHours,
                     ShareKind::Time};

const DeviceProfile& z1() { return test::shipped().profiles.at("zolertia-z1"); }

EnergyLedger day(std::initializer_list<ModeInterval> ivs) {
  return EnergyLedger{"d", ivs, {}, {0.0, 86400.0}};
}

SmcConfig region(double p1, double p0, double a = 0.05, double b = 0.05) {
  SmcConfig c;
  c.p1 = p1;
  c.p0 = p0;
  c.alpha = a;
  c.beta = b;
  return c;
}

}  // namespace

TEST_SUITE("smc") {

TEST_CASE("evaluate") {
  const auto lpm = day({{OperatingMode::LPM, 0, 86400}});
  const auto rx = day({{OperatingMode::Rx, 0, 86400}});
  CHECK(evaluate(kPhi2, lpm, z1()));
  CHECK_FALSE(evaluate(kPhi3, rx, z1()));

  // working hours are [28800, 64800): 34200 s LPM, 1800 s Rx
  const auto mixed = day({{OperatingMode::LPM, 0, 63000}, {OperatingMode::Rx, 63000, 1800}, {OperatingMode::LPM, 64800, 21600}});
  CHECK(evaluate(kPhi2, mixed, z1()));
  CHECK(evaluate(kPhi3, mixed, z1()));
  const auto more_rx =
      day({{OperatingMode::LPM, 0, 63000 - 7200}, {OperatingMode::Rx, 63000 - 7200, 9000}, {OperatingMode::LPM, 64800, 21600}});
  CHECK_FALSE(evaluate(kPhi2, more_rx, z1()));
  CHECK_FALSE(evaluate(kPhi3, more_rx, z1()));  // Rx 9000 / 36000 = 0.25
}

TEST_CASE("evaluate lifetime and empty scopes") {
  const auto lpm = day({{OperatingMode::LPM, 0, 86400}});
  CHECK(evaluate(kPhi1, lpm, z1()) == (lifetime_hours(z1(), lpm) >= 168.0));
  Property low = kPhi1;
  low.threshold = lifetime_hours(z1(), lpm) * 0.999;
  CHECK(evaluate(low, lpm, z1()));
  low.threshold = lifetime_hours(z1(), lpm) * 1.001;
  CHECK_FALSE(evaluate(low, lpm, z1()));

  const EnergyLedger night{"d", {{OperatingMode::LPM, 0, 7 * 3600.0}}, {}, {0.0, 7 * 3600.0}};
  CHECK_THROWS_AS(evaluate(kPhi2, night, z1()), Error);
}

TEST_CASE("property and config validation") {
  Property p = kPhi2;
  p.threshold = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = kPhi1;
  p.threshold = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(region(0.6, 0.4).validate(), ValidationError);
  CHECK_THROWS_AS(region(0.45, 0.55, 0.5).validate(), ValidationError);
  SmcConfig d;
  d.delta = 0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  CHECK_NOTHROW(SmcConfig{}.validate());
  CHECK(parse_scope("working-hours") == Scope::WorkingHours);
  CHECK_THROWS_AS(parse_property_kind("eventually"), ValidationError);
}

TEST_CASE("sprt on degenerate samplers") {
  const auto yes = sprt([](std::size_t) { return true; }, region(0.4, 0.6));
  CHECK(yes.kind == VerdictKind::AcceptH0);
  CHECK(yes.samples < 20);
  CHECK(yes.holds());
  const auto no = sprt([](std::size_t) { return false; }, region(0.4, 0.6));
  CHECK(no.kind == VerdictKind::AcceptH1);
  CHECK(no.samples < 20);
  CHECK_FALSE(no.holds());
}

TEST_CASE("sprt on Bernoulli(0.9) with alpha = beta = 0.01") {
  int h0 = 0;
  for (std::uint64_t run = 0; run < 200; ++run)
    h0 += sprt(bernoulli_sampler(0.9, derive_seed(2024, run)), region(0.45, 0.55, 0.01, 0.01)).kind == VerdictKind::AcceptH0;
  CHECK(h0 >= 198);
}

TEST_CASE("sprt stops at max_samples inside the indifference region") {
  SmcConfig c = region(0.45, 0.55);
  c.max_samples = 50;
  const auto v = sprt([](std::size_t i) { return i % 2 == 0; }, c);
  CHECK(v.kind == VerdictKind::Inconclusive);
  CHECK(v.samples == 50);
  CHECK(v.p_hat == 0.5);
}

TEST_CASE("sprt does not depend on the thread count") {
  for (double p : {0.3, 0.5, 0.52, 0.8}) {
    const auto a = sprt(bernoulli_sampler(p, 9), region(0.45, 0.55), 1);
    const auto b = sprt(bernoulli_sampler(p, 9), region(0.45, 0.55), 3);
    CHECK(a.kind == b.kind);
    CHECK(a.samples == b.samples);
    CHECK(a.successes == b.successes);
  }
}

TEST_CASE("sprt error rates") {
  const SmcConfig c = region(0.45, 0.55);
  for (double p : {0.2, 0.4, 0.6, 0.9}) {
    int wrong = 0;
    for (std::uint64_t run = 0; run < 200; ++run) {
      const auto v = sprt(bernoulli_sampler(p, derive_seed(77, run)), c);
      wrong += (p >= c.p0 && v.kind == VerdictKind::AcceptH1) || (p <= c.p1 && v.kind == VerdictKind::AcceptH0);
    }
    CHECK_MESSAGE(wrong <= static_cast<int>(200 * (0.05 + 0.02)), "p = " << p);
  }
}

TEST_CASE("Chernoff sample size") {
  CHECK(chernoff_sample_size(0.05, 0.05) == 738);
  CHECK(chernoff_sample_size(0.01, 0.05) == 18445);
  for (double d : {0.01, 0.02, 0.05, 0.1})
    CHECK(chernoff_sample_size(d, 0.01) >= chernoff_sample_size(d, 0.05));
  for (double a : {0.01, 0.05, 0.1})
    CHECK(chernoff_sample_size(0.02, a) >= chernoff_sample_size(0.05, a));
}

TEST_CASE("estimate") {
  const auto one = estimate([](std::size_t) { return true; }, 0.05, 0.05);
  CHECK(one.kind == VerdictKind::Estimate);
  CHECK(one.p_hat == 1.0);
  CHECK(one.samples == 738);
  CHECK(one.holds());
  CHECK(estimate([](std::size_t) { return false; }, 0.05, 0.05).p_hat == 0.0);

  const auto seq = estimate(bernoulli_sampler(0.3, 5), 0.05, 0.05, 1);
  const auto par = estimate(bernoulli_sampler(0.3, 5), 0.05, 0.05, 4);
  CHECK(seq.successes == par.successes);
}

TEST_CASE("estimate coverage") {
  for (double p : {0.2, 0.5, 0.9}) {
    int covered = 0;
    for (std::uint64_t run = 0; run < 200; ++run)
      covered += std::abs(estimate(bernoulli_sampler(p, derive_seed(31, run)), 0.05, 0.05).p_hat - p) < 0.05;
    CHECK_MESSAGE(covered >= static_cast<int>(200 * (1 - 0.05 - 0.02)), "p = " << p);
  }
}

TEST_CASE("requirements file") {
  const auto reqs = load_requirements(test::data_path("requirements.json"));
  REQUIRE(reqs.items.size() == 3);
  const auto& phi2 = reqs.find("phi2");
  CHECK(phi2.property.kind == PropertyKind::ModeTimeshareAtLeast);
  CHECK(phi2.property.threshold == 0.9);
  CHECK(phi2.property.scope == Scope::WorkingHours);
  CHECK(phi2.method == SmcMethod::Estimate);
  CHECK(phi2.smc.delta == 0.05);
  CHECK(phi2.smc.p1 == 0.45);
  CHECK(reqs.find("phi1").property.threshold == 168.0);
  CHECK_THROWS_AS(reqs.find("phi9"), ValidationError);
  CHECK(reqs.select({"phi3"}).items.size() == 1);

  auto copy = reqs;
  SmcOverrides o;
  o.method = SmcMethod::Sprt;
  o.alpha = 0.01;
  copy.override_smc(o);
  CHECK(copy.items[0].method == SmcMethod::Sprt);
  CHECK(copy.items[2].smc.alpha == 0.01);
  CHECK(copy.items[2].smc.beta == 0.05);
}

TEST_CASE("requirements parse errors") {
  auto bad = [](const char* json) {
    INFO(std::string(json));
    CHECK_THROWS_AS(parse_requirements(json), ValidationError);
  };
  bad("{");
  bad("[]");
  bad(R"({"requirements": [{"id": "a", "type": "lifetime_at_least"}]})");
  bad(R"({"requirements": [{"id": "a", "type": "mode_timeshare_at_least", "threshold": 0.5}]})");
  bad(R"({"requirements": [{"id": "a", "type": "lifetime_at_least", "threshold": 1, "colour": "red"}]})");
  bad(R"({"requirements": [{"id": "a", "type": "lifetime_at_least", "threshold": 1},
                           {"id": "a", "type": "lifetime_at_least", "threshold": 2}]})");
  bad(R"({"defaults": {"method": "bayes"}, "requirements": []})");
  bad(R"({"requirements": [{"id": "a", "type": "lifetime_at_least", "threshold": 1, "devices": []}]})");
  bad(R"({"requirements": [{"id": "a", "type": "mode_timeshare_at_most", "mode": "Sleep", "threshold": 0.5}]})");
  CHECK_NOTHROW(parse_requirements(R"({"requirements": []})"));
}

TEST_CASE("verify on a short horizon") {
  const auto reqs = load_requirements(test::data_path("requirements.json")).select({"phi2"});
  SmcOverrides o;
  o.delta = 0.25;
  auto loose = reqs;
  loose.override_smc(o);
  for (auto [rdc, expect] : {std::pair{RdcProtocol::LPP, 1.0}, std::pair{RdcProtocol::NullRDC, 0.0}}) {
    Scenario s = test::shipped();
    s.config.rdc_protocol = rdc;
    VerifyOptions opt;
    opt.horizon = 86400.0;
    const auto report = verify_requirements(s, loose, opt);
    REQUIRE(report.results.size() == 1);
    CHECK(report.results[0].verdict.samples == chernoff_sample_size(0.25, 0.05));
    CHECK(report.results[0].verdict.p_hat == expect);
    CHECK(report.devices.size() == 9);

    std::ostringstream os;
    write_report_csv(os, report);
    CHECK(os.str().rfind("requirement,verdict,p_hat,samples\nphi2,", 0) == 0);
  }
}

TEST_CASE("replica cache runs each replica once") {
  const auto sys = build_system(test::shipped());
  ReplicaCache cache(sys, 86400.0, 3);
  const auto& a = cache.get(2);
  const auto& b = cache.get(2);
  CHECK(&a == &b);
  CHECK(cache.computed() == std::vector<std::size_t>{2});
  const auto sampler = make_sampler(cache, kPhi2, {});
  CHECK(sampler(0) == sampler(0));
  CHECK(cache.computed().size() == 2);
  CHECK_THROWS_AS(make_sampler(cache, kPhi2, {"nope"}), ValidationError);
}

}  // TEST_SUITE
