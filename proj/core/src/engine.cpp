#include "iesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

void PowertraceConfig::validate() const {
  if (!(period_s > 0) || !std::isfinite(period_s))
    throw ValidationError("powertrace.period", fmt::format("{}", period_s), "> 0 s");
  if (!(rtimer_hz > 0) || !std::isfinite(rtimer_hz))
    throw ValidationError("powertrace.rtimer-hz", fmt::format("{}", rtimer_hz), "> 0 Hz");
}

const EnergyLedger* Trace::find_ledger(std::string_view device) const noexcept {
  for (const auto& l : ledgers)
    if (l.device == device) return &l;
  return nullptr;
}

const EnergyLedger& Trace::ledger(std::string_view device) const {
  if (const auto* l = find_ledger(device)) return *l;
  throw Error(fmt::format("trace has no device '{}'", device));
}

std::vector<std::size_t> ledger_assignment(const SystemModel& system) {
  std::map<std::string, std::size_t, std::less<>> ledger_by_name;
  std::size_t next = 0;
  for (const auto& c : system.components())
    if (c.has_modes()) ledger_by_name.emplace(c.name(), next++);
  std::vector<std::size_t> out;
  for (const auto& c : system.components()) {
    auto it = ledger_by_name.find(c.has_modes() ? c.name() : c.owner());
    out.push_back(it == ledger_by_name.end() ? kNoLedger : it->second);
  }
  return out;
}

namespace {

// Binary heap over slot ids keyed by (time, rank), with O(log n) updates.
class StepHeap {
 public:
  explicit StepHeap(std::vector<std::size_t> rank)
      : rank_(std::move(rank)), time_(rank_.size(), kNever), pos_(rank_.size(), kAbsent) {}

  bool empty() const noexcept { return heap_.empty(); }
  double top_time() const noexcept { return time_[heap_.front()]; }

  void set(std::size_t id, double t) {
    if (t == kNever) {
      remove(id);
      return;
    }
    if (pos_[id] == kAbsent) {
      time_[id] = t;
      pos_[id] = heap_.size();
      heap_.push_back(id);
      up(pos_[id]);
    } else if (t != time_[id]) {
      const bool earlier = t < time_[id];
      time_[id] = t;
      earlier ? up(pos_[id]) : down(pos_[id]);
    }
  }

  // Appends every id whose time equals the minimum.
  void collect_top(std::vector<std::size_t>& out) {
    if (heap_.empty()) return;
    const double t = top_time();
    stack_.assign(1, 0);
    while (!stack_.empty()) {
      const std::size_t i = stack_.back();
      stack_.pop_back();
      if (time_[heap_[i]] != t) continue;
      out.push_back(heap_[i]);
      for (std::size_t c = 2 * i + 1; c <= 2 * i + 2 && c < heap_.size(); ++c) stack_.push_back(c);
    }
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

  bool less(std::size_t a, std::size_t b) const noexcept {
    return time_[a] < time_[b] || (time_[a] == time_[b] && rank_[a] < rank_[b]);
  }
  void place(std::size_t i, std::size_t id) {
    heap_[i] = id;
    pos_[id] = i;
  }
  void up(std::size_t i) {
    const std::size_t id = heap_[i];
    while (i > 0) {
      const std::size_t p = (i - 1) / 2;
      if (!less(id, heap_[p])) break;
      place(i, heap_[p]);
      i = p;
    }
    place(i, id);
  }
  void down(std::size_t i) {
    const std::size_t id = heap_[i];
    const std::size_t n = heap_.size();
    while (true) {
      std::size_t c = 2 * i + 1;
      if (c >= n) break;
      if (c + 1 < n && less(heap_[c + 1], heap_[c])) ++c;
      if (!less(heap_[c], id)) break;
      place(i, heap_[c]);
      i = c;
    }
    place(i, id);
  }
  void remove(std::size_t id) {
    const std::size_t i = pos_[id];
    if (i == kAbsent) return;
    pos_[id] = kAbsent;
    time_[id] = kNever;
    const std::size_t last = heap_.back();
    heap_.pop_back();
    if (last == id) return;
    place(i, last);
    up(i);
    down(pos_[last]);
  }

  std::vector<std::size_t> rank_;
  std::vector<double> time_;
  std::vector<std::size_t> pos_;
  std::vector<std::size_t> heap_;
  std::vector<std::size_t> stack_;
};

constexpr std::uint64_t kTieStream = 0xFFFFFFFFULL;

class Simulator {
 public:
  Simulator(const SystemModel& system, std::uint64_t seed) : sys_(system) {
    if (!sys_.finalized()) throw std::logic_error("run: SystemModel must be finalized");
    const auto& comps = sys_.components();
    rngs_.reserve(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) rngs_.emplace_back(derive_seed(seed, c));
    tie_rng_.seed(derive_seed(seed, kTieStream));

    // Enumerate steps and give each a rank from its (device id, label) key.
    struct Key {
      std::string device;
      std::string label;
      std::string name;
    };
    std::vector<Key> keys;
    step_of_.resize(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
      step_of_[c].assign(comps[c].transitions().size(), kNone);
      for (std::size_t t = 0; t < comps[c].transitions().size(); ++t) {
        const auto& tr = comps[c].transitions()[t];
        if (tr.exported) continue;
        step_of_[c][t] = steps_.size();
        steps_.push_back(Step::internal(c, t));
        keys.push_back({comps[c].name(), tr.label, fmt::format("{}#{}", tr.label, t)});
      }
    }
    interaction_step_.resize(sys_.interactions().size());
    ports_.resize(sys_.interactions().size());
    for (std::size_t i = 0; i < sys_.interactions().size(); ++i) {
      const auto& in = sys_.interactions()[i];
      for (std::size_t p = 0; p < in.ports.size(); ++p) ports_[i].push_back({in.ports[p].component, &sys_.port_arcs(i, p)});
      interaction_step_[i] = steps_.size();
      steps_.push_back(Step::interaction(i));
      keys.push_back({comps[in.ports[0].component].name(), in.ports[0].label, in.name});
    }
    std::vector<std::size_t> order(steps_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(keys[a].device, keys[a].label, keys[a].name) < std::tie(keys[b].device, keys[b].label, keys[b].name);
    });
    ranks_.resize(steps_.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks_[order[r]] = r;

    // Heap slots: one per component (its earliest internal arc), then one per
    // interaction. Ties are resolved on the expanded step list, so the slot
    // order inside the heap does not affect the outcome.
    const std::size_t slots = comps.size() + sys_.interactions().size();
    std::vector<std::size_t> slot_rank(slots);
    for (std::size_t i = 0; i < slots; ++i) slot_rank[i] = i;
    heap_.emplace(std::move(slot_rank));

    internal_out_.resize(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
      internal_out_[c].resize(comps[c].locations().size());
      for (std::size_t loc = 0; loc < comps[c].locations().size(); ++loc)
        for (std::size_t t : comps[c].outgoing(loc))
          if (step_of_[c][t] != kNone) internal_out_[c][loc].push_back({t, step_of_[c][t]});
    }
    state_ = initial_state(sys_, std::span<Rng>(rngs_));
    for (std::size_t c = 0; c < comps.size(); ++c) refresh(c);
  }

  // Executes all steps strictly before the horizon.
  void run(double horizon, ExecutionObserver& observer, bool allow_quiescence) {
    std::vector<std::size_t> candidates;
    std::vector<std::size_t> touched;
    while (true) {
      if (heap_->empty()) {
        if (allow_quiescence) break;
        throw DeadlockError(state_.now, describe_state(sys_, state_));
      }
      if (heap_->top_time() >= horizon) break;
      const double now = heap_->top_time();
      slots_.clear();
      heap_->collect_top(slots_);
      candidates.clear();
      const std::size_t ncomp = state_.components.size();
      for (std::size_t slot : slots_) {
        if (slot >= ncomp) {
          candidates.push_back(interaction_step_[slot - ncomp]);
          continue;
        }
        const auto& cs = state_.components[slot];
        for (const auto& a : internal_out_[slot][cs.location])
          if (cs.deadline[a.transition] == now) candidates.push_back(a.step);
      }
      std::size_t chosen = candidates.front();
      if (candidates.size() > 1) chosen = break_tie(candidates);
      touched.clear();
      fire_in_place(sys_, state_, steps_[chosen], std::span<Rng>(rngs_), &observer, &touched);
      for (std::size_t c : touched) refresh(c);
    }
    state_.now = std::max(state_.now, horizon);
    // Clip the interval still in progress at the horizon.
    for (std::size_t c = 0; c < sys_.components().size(); ++c) {
      const auto& cs = state_.components[c];
      const auto& mode = sys_.components()[c].locations()[cs.location].mode;
      if (mode && horizon > cs.entered_at) observer.on_interval(c, *mode, cs.entered_at, horizon);
    }
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t break_tie(std::vector<std::size_t>& candidates) {
    // Priority filter among simultaneously ready interactions.
    auto& ready_interactions = scratch_;
    ready_interactions.clear();
    for (std::size_t id : candidates)
      if (steps_[id].kind == Step::Kind::Interaction) ready_interactions.push_back(steps_[id].index);
    if (ready_interactions.size() > 1) {
      std::erase_if(candidates, [&](std::size_t id) {
        return steps_[id].kind == Step::Kind::Interaction && sys_.dominated(steps_[id].index, ready_interactions);
      });
    }
    if (candidates.size() == 1) return candidates.front();
    // collect_top order depends on heap layout; sort by rank for a canonical list.
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return rank_less(a, b); });
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(tie_rng_)];
  }

  bool rank_less(std::size_t a, std::size_t b) const { return ranks_[a] < ranks_[b]; }

  void refresh(std::size_t c) {
    const auto& cs = state_.components[c];
    double next = kNever;
    for (const auto& a : internal_out_[c][cs.location]) next = std::min(next, cs.deadline[a.transition]);
    heap_->set(c, next);
    const std::size_t ncomp = state_.components.size();
    for (std::size_t i : sys_.interactions_of(c)) heap_->set(ncomp + i, interaction_ready(i));
  }

  // Same value as ready_time(), without the bounds-checked lookups.
  double interaction_ready(std::size_t i) const {
    double ready = -kNever;
    for (const auto& port : ports_[i]) {
      const auto& cs = state_.components[port.component];
      double best = kNever;
      for (std::size_t t : (*port.arcs)[cs.location]) best = std::min(best, cs.deadline[t]);
      if (best == kNever) return kNever;
      ready = std::max(ready, best);
    }
    return ready;
  }

  struct InternalArc {
    std::size_t transition;
    std::size_t step;
  };
  struct PortRef {
    std::size_t component;
    const std::vector<std::vector<std::size_t>>* arcs;  // by location
  };

  const SystemModel& sys_;
  std::vector<Rng> rngs_;
  Rng tie_rng_;
  std::vector<Step> steps_;
  std::vector<std::vector<std::size_t>> step_of_;
  std::vector<std::size_t> interaction_step_;
  std::vector<std::size_t> ranks_;
  std::optional<StepHeap> heap_;
  SystemState state_;
  std::vector<std::size_t> slots_;
  std::vector<std::size_t> scratch_;
  std::vector<std::vector<PortRef>> ports_;
  std::vector<std::vector<std::vector<InternalArc>>> internal_out_;  // [component][location]
};

class TraceRecorder : public ExecutionObserver {
 public:
  TraceRecorder(const SystemModel& system, Trace& trace, bool record_events)
      : trace_(trace), ledger_of_(ledger_assignment(system)), record_events_(record_events), system_(system) {
    for (const auto& c : system.components()) {
      trace_.components.push_back(c.name());
      if (c.has_modes()) trace_.ledgers.push_back(EnergyLedger{c.name(), {}, {}, {0.0, trace_.horizon}});
    }
  }
  void on_interval(std::size_t c, OperatingMode mode, double start, double end) override {
    const std::size_t l = ledger_of_[c];
    if (l != kNoLedger) trace_.ledgers[l].intervals.push_back({mode, start, end - start});
  }
  void on_peripheral(std::size_t c, const std::string& event, double time) override {
    const std::size_t l = ledger_of_[c];
    if (l != kNoLedger) trace_.ledgers[l].peripheral_events.push_back({time, event});
  }
  void on_step(const Step& step, double time) override {
    if (!record_events_) return;
    if (step.kind == Step::Kind::Internal) {
      add_event(time, step.index, system_.components()[step.index].transitions()[step.transition].label);
    } else {
      for (const auto& p : system_.interactions()[step.index].ports) add_event(time, p.component, p.label);
    }
  }

 private:
  void add_event(double time, std::size_t component, const std::string& label) {
    auto [it, inserted] = label_ids_.try_emplace(label, static_cast<std::uint32_t>(trace_.labels.size()));
    if (inserted) trace_.labels.push_back(label);
    trace_.events.push_back({time, static_cast<std::uint32_t>(component), it->second});
  }

  Trace& trace_;
  std::vector<std::size_t> ledger_of_;
  bool record_events_;
  const SystemModel& system_;
  std::map<std::string, std::uint32_t, std::less<>> label_ids_;
};

void check_horizon(double horizon) {
  if (!(horizon > 0) || !std::isfinite(horizon))
    throw ValidationError("horizon", fmt::format("{}", horizon), "finite and > 0 s");
}

}  // namespace

void run(const SystemModel& system, double horizon, std::uint64_t seed, ExecutionObserver& observer,
         bool allow_quiescence) {
  check_horizon(horizon);
  Simulator sim(system, seed);
  sim.run(horizon, observer, allow_quiescence);
}

Trace run(const SystemModel& system, double horizon, std::uint64_t seed, const RunOptions& options) {
  check_horizon(horizon);
  Trace trace;
  trace.horizon = horizon;
  trace.seed = seed;
  TraceRecorder recorder(system, trace, options.record_events);
  run(system, horizon, seed, recorder, options.allow_quiescence);
  // Intervals clipped at the horizon arrive last; keep each ledger time-ordered.
  for (auto& l : trace.ledgers)
    std::stable_sort(l.intervals.begin(), l.intervals.end(),
                     [](const ModeInterval& a, const ModeInterval& b) { return a.start < b.start; });
  return trace;
}

std::vector<Trace> replicate(const SystemModel& system, double horizon, std::size_t n, std::uint64_t root_seed,
                             unsigned jobs, const RunOptions& options) {
  if (n < 1) throw ValidationError("replicas", std::to_string(n), ">= 1");
  return replicate_map(n, root_seed, jobs,
                       [&](std::size_t, std::uint64_t seed) { return run(system, horizon, seed, options); });
}

// ---- usage -----------------------------------------------------------------

UsageAccumulator::UsageAccumulator(const SystemModel& system, double horizon, double work_start_h, double work_end_h)
    : ledger_of_(ledger_assignment(system)), work_start_(work_start_h * 3600.0), work_end_(work_end_h * 3600.0) {
  double working = 0.0;
  for (const auto& w : working_windows(horizon, work_start_h, work_end_h)) working += w.length();
  for (const auto& c : system.components()) {
    if (!c.has_modes()) continue;
    DeviceUsage u;
    u.device = c.name();
    u.whole.window = horizon;
    u.working.window = working;
    usage_.push_back(std::move(u));
  }
}

double UsageAccumulator::working_overlap(double start, double end) const noexcept {
  double total = 0.0;
  for (double day = std::floor(start / kSecondsPerDay); day * kSecondsPerDay < end; ++day) {
    const double b = std::max(start, day * kSecondsPerDay + work_start_);
    const double e = std::min(end, day * kSecondsPerDay + work_end_);
    if (e > b) total += e - b;
  }
  return total;
}

bool UsageAccumulator::in_working(double t) const noexcept {
  const double tod = t - std::floor(t / kSecondsPerDay) * kSecondsPerDay;
  return tod >= work_start_ && tod < work_end_;
}

void UsageAccumulator::on_interval(std::size_t c, OperatingMode mode, double start, double end) {
  const std::size_t l = ledger_of_[c];
  if (l == kNoLedger) return;
  usage_[l].whole.time[index(mode)] += end - start;
  usage_[l].working.time[index(mode)] += working_overlap(start, end);
}

void UsageAccumulator::on_peripheral(std::size_t c, const std::string& event, double time) {
  const std::size_t l = ledger_of_[c];
  if (l == kNoLedger) return;
  usage_[l].whole.peripheral_counts[event]++;
  if (in_working(time)) usage_[l].working.peripheral_counts[event]++;
}

DeviceUsage usage_from_ledger(const EnergyLedger& ledger, double work_start_h, double work_end_h) {
  DeviceUsage u;
  u.device = ledger.device;
  u.whole = ModeTotals::from(ledger);
  const auto windows = working_windows(ledger.window.end, work_start_h, work_end_h);
  u.working.window = 0.0;
  for (const auto& w : windows) {
    const ModeTotals part = ModeTotals::from(ledger.clipped(w));
    for (auto m : kAllModes) u.working.time[index(m)] += part.time[index(m)];
    for (const auto& [name, n] : part.peripheral_counts) u.working.peripheral_counts[name] += n;
    u.working.window += part.window;
  }
  return u;
}

// ---- powertrace ------------------------------------------------------------

std::vector<PowertraceRecord> powertrace_log(const Trace& trace, const PowertraceConfig& config) {
  config.validate();
  std::vector<PowertraceRecord> out;
  const auto samples = static_cast<std::size_t>(std::floor(trace.horizon / config.period_s + 1e-9));
  if (samples == 0) return out;
  out.reserve(samples * trace.ledgers.size());
  std::vector<std::size_t> cursor(trace.ledgers.size(), 0);
  std::vector<std::array<double, kModeCount>> done(trace.ledgers.size(), std::array<double, kModeCount>{});
  for (std::size_t k = 1; k <= samples; ++k) {
    const double t = static_cast<double>(k) * config.period_s;
    for (std::size_t d = 0; d < trace.ledgers.size(); ++d) {
      const auto& iv = trace.ledgers[d].intervals;
      auto& cur = cursor[d];
      while (cur < iv.size() && iv[cur].end() <= t) {
        done[d][index(iv[cur].mode)] += iv[cur].duration;
        ++cur;
      }
      std::array<double, kModeCount> cum = done[d];
      if (cur < iv.size() && iv[cur].start < t) cum[index(iv[cur].mode)] += t - iv[cur].start;
      PowertraceRecord r;
      r.time = t;
      r.device = d;
      for (std::size_t m = 0; m < kModeCount; ++m)
        r.ticks[m] = static_cast<std::uint64_t>(std::floor(cum[m] * config.rtimer_hz + 1e-6));
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace iesim
