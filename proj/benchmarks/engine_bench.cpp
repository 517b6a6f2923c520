#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "iesim/config.hpp"
#include "iesim/distribution.hpp"
#include "iesim/energy.hpp"
#include "iesim/engine.hpp"
#include "iesim/requirements.hpp"
#include "iesim/scenario.hpp"

using namespace iesim;

namespace {

const Scenario& shipped() {
  static const Scenario s = load_scenario(std::string(IESIM_DATA_DIR) + "/bms.xml");
  return s;
}

struct CountSteps : ExecutionObserver {
  std::size_t steps = 0;
  void on_interval(std::size_t, OperatingMode, double, double) override {}
  void on_step(const Step&, double) override { ++steps; }
};

// One simulated day of the BMS scenario; arg 0 indexes sweep_values(rdc-protocol).
void BM_SimulateDay(benchmark::State& state) {
  const auto protocols = sweep_values(config_key::rdc_protocol);
  EnergyConfig cfg = shipped().config;
  set_parameter(cfg, config_key::rdc_protocol, protocols.at(static_cast<std::size_t>(state.range(0))));
  const BuiltSystem built = build_system(shipped(), cfg);
  std::uint64_t seed = 1;
  std::size_t steps = 0;
  for (auto _ : state) {
    CountSteps obs;
    run(built.model, 86400.0, seed++, obs);
    steps += obs.steps;
  }
  state.SetLabel(protocols[static_cast<std::size_t>(state.range(0))]);
  state.SetItemsProcessed(static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_SimulateDay)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

// The accumulator the SMC path uses instead of full ledgers.
void BM_SimulateDayUsage(benchmark::State& state) {
  const BuiltSystem built = build_system(shipped());
  std::uint64_t seed = 1;
  for (auto _ : state) {
    UsageAccumulator acc(built.model, 86400.0);
    run(built.model, 86400.0, seed++, acc);
    benchmark::DoNotOptimize(acc.usage().data());
  }
}
BENCHMARK(BM_SimulateDayUsage)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State& state, Distribution d) {
  Rng rng = make_rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(d.sample(rng));
}
BENCHMARK_CAPTURE(BM_Sample, poisson40, Distribution::poisson(40.0, 0.001));
BENCHMARK_CAPTURE(BM_Sample, normal, Distribution::normal(0.02, 0.002));
BENCHMARK_CAPTURE(BM_Sample, exponential, Distribution::exponential(2.0));

void BM_TotalEnergy(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> mode(0, 3);
  std::uniform_real_distribution<double> len(1e-4, 1.0);
  EnergyLedger l;
  double t = 0.0;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    const double d = len(rng);
    l.intervals.push_back({static_cast<OperatingMode>(mode(rng)), t, d});
    t += d;
  }
  l.window = {0.0, t};
  const DeviceProfile& p = shipped().profiles.at("zolertia-z1");
  for (auto _ : state) benchmark::DoNotOptimize(total_energy(l, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TotalEnergy)->Range(64, 1 << 16);

}  // namespace
BENCHMARK_MAIN();
