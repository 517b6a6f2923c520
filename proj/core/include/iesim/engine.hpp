#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "iesim/energy.hpp"
#include "iesim/model.hpp"
#include "iesim/rng.hpp"

namespace iesim {

inline constexpr double kSecondsPerDay = 86400.0;

struct PowertraceConfig {
  double period_s = 1.0;
  double rtimer_hz = 32768.0;
  void validate() const;
};

struct TraceEvent {
  double time = 0.0;
  std::uint32_t component = 0;
  std::uint32_t label = 0;  // index into Trace::labels
};

struct Trace {
  std::vector<EnergyLedger> ledgers;   // one per device, in component order
  std::vector<std::string> components;  // component names, indexed by TraceEvent::component
  std::vector<std::string> labels;
  std::vector<TraceEvent> events;
  double horizon = 0.0;
  std::uint64_t seed = 0;

  const EnergyLedger& ledger(std::string_view device) const;
  const EnergyLedger* find_ledger(std::string_view device) const noexcept;
};

struct RunOptions {
  bool record_events = true;
  // When nothing can fire any more, idle until the horizon instead of
  // raising DeadlockError.
  bool allow_quiescence = false;
};

// Streams intervals (truncated at the horizon) and peripheral events into the observer.
void run(const SystemModel& system, double horizon, std::uint64_t seed, ExecutionObserver& observer,
         bool allow_quiescence = false);
Trace run(const SystemModel& system, double horizon, std::uint64_t seed, const RunOptions& options = {});

// Ledger index per component: mode-carrying components get their own ledger,
// others book on their owner's ledger (npos when the owner has none).
std::vector<std::size_t> ledger_assignment(const SystemModel& system);
inline constexpr std::size_t kNoLedger = static_cast<std::size_t>(-1);

// Per-device totals over the whole horizon and over working hours.
struct DeviceUsage {
  std::string device;
  ModeTotals whole;
  ModeTotals working;
};

class UsageAccumulator : public ExecutionObserver {
 public:
  UsageAccumulator(const SystemModel& system, double horizon, double work_start_h = 8.0, double work_end_h = 18.0);
  void on_interval(std::size_t component, OperatingMode mode, double start, double end) override;
  void on_peripheral(std::size_t component, const std::string& event, double time) override;
  const std::vector<DeviceUsage>& usage() const noexcept { return usage_; }
  std::vector<DeviceUsage> take() { return std::move(usage_); }

 private:
  double working_overlap(double start, double end) const noexcept;
  bool in_working(double t) const noexcept;

  std::vector<std::size_t> ledger_of_;
  std::vector<DeviceUsage> usage_;
  double work_start_;
  double work_end_;
};

// Same quantities computed from a recorded ledger.
DeviceUsage usage_from_ledger(const EnergyLedger& ledger, double work_start_h = 8.0, double work_end_h = 18.0);

struct PowertraceRecord {
  double time = 0.0;
  std::size_t device = 0;  // index into Trace::ledgers
  std::array<std::uint64_t, kModeCount> ticks{};  // cumulative, indexed by OperatingMode
};

std::vector<PowertraceRecord> powertrace_log(const Trace& trace, const PowertraceConfig& config);

// Runs `fn(i, derive_seed(root_seed, i))` for i in [0, n) on up to `jobs`
// threads; results are stored by index, so the output does not depend on
// scheduling.
template <class Fn>
auto replicate_map(std::size_t n, std::uint64_t root_seed, unsigned jobs, Fn fn)
    -> std::vector<decltype(fn(std::size_t{}, std::uint64_t{}))> {
  using R = decltype(fn(std::size_t{}, std::uint64_t{}));
  std::vector<R> out(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i, derive_seed(root_seed, i));
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i, derive_seed(root_seed, i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<Trace> replicate(const SystemModel& system, double horizon, std::size_t n, std::uint64_t root_seed,
                             unsigned jobs = 1, const RunOptions& options = {});

// CSV export: 6 fractional digits, '.' separator, '\n' line endings.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_powertrace_csv(std::ostream& out, const Trace& trace, const std::vector<PowertraceRecord>& records);
// Reads a trace CSV back into per-device ledgers (window [0, horizon]).
std::vector<EnergyLedger> read_trace_csv(std::istream& in, double horizon = 0.0);

}  // namespace iesim
