#include "iesim/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

std::string_view to_string(OperatingMode mode) noexcept {
  switch (mode) {
    case OperatingMode::LPM: return "LPM";
    case OperatingMode::CPU: return "CPU";
    case OperatingMode::Tx: return "Tx";
    case OperatingMode::Rx: return "Rx";
  }
  return "?";
}

std::optional<OperatingMode> parse_mode(std::string_view text) noexcept {
  auto eq = [&](std::string_view b) {
    if (text.size() != b.size()) return false;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(text[i])) != std::tolower(static_cast<unsigned char>(b[i])))
        return false;
    return true;
  };
  for (auto m : kAllModes)
    if (eq(to_string(m))) return m;
  return std::nullopt;
}

// ---- AtomicComponent -------------------------------------------------------

AtomicComponent::AtomicComponent(std::string name) : name_(std::move(name)) {}

LocationId AtomicComponent::add_location(std::string name, std::optional<OperatingMode> mode) {
  if (find_location(name)) throw ModelError(fmt::format("{}: duplicate location '{}'", name_, name));
  locations_.push_back({std::move(name), mode});
  outgoing_.emplace_back();
  return locations_.size() - 1;
}

void AtomicComponent::set_initial(LocationId loc) {
  if (loc >= locations_.size()) throw ModelError(fmt::format("{}: initial location {} undeclared", name_, loc));
  initial_ = loc;
}

LocationId AtomicComponent::initial() const {
  if (!initial_) throw ModelError(fmt::format("{}: no initial location", name_));
  return *initial_;
}

std::size_t AtomicComponent::add_variable(std::string name, double initial) {
  if (find_variable(name)) throw ModelError(fmt::format("{}: duplicate variable '{}'", name_, name));
  var_names_.push_back(std::move(name));
  var_init_.push_back(initial);
  return var_names_.size() - 1;
}

std::size_t AtomicComponent::add_transition(Transition t) {
  if (t.source >= locations_.size() || t.target >= locations_.size())
    throw ModelError(fmt::format("{}: transition '{}' references an undeclared location", name_, t.label));
  if (t.label.empty()) throw ModelError(fmt::format("{}: transition without label", name_));
  transitions_.push_back(std::move(t));
  outgoing_[transitions_.back().source].push_back(transitions_.size() - 1);
  return transitions_.size() - 1;
}

std::optional<LocationId> AtomicComponent::find_location(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < locations_.size(); ++i)
    if (locations_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> AtomicComponent::find_variable(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < var_names_.size(); ++i)
    if (var_names_[i] == name) return i;
  return std::nullopt;
}

std::size_t AtomicComponent::variable(std::string_view name) const {
  if (auto v = find_variable(name)) return *v;
  throw ModelError(fmt::format("{}: unknown variable '{}'", name_, name));
}

std::vector<std::string> AtomicComponent::exported_labels() const {
  std::vector<std::string> out;
  for (const auto& t : transitions_)
    if (t.exported && std::find(out.begin(), out.end(), t.label) == out.end()) out.push_back(t.label);
  return out;
}

bool AtomicComponent::has_modes() const noexcept {
  return std::any_of(locations_.begin(), locations_.end(), [](const Location& l) { return l.mode.has_value(); });
}

void AtomicComponent::validate() const {
  if (name_.empty()) throw ModelError("component without name");
  if (locations_.empty()) throw ModelError(fmt::format("{}: no locations", name_));
  (void)initial();
  for (const auto& t : transitions_) {
    if (t.source >= locations_.size() || t.target >= locations_.size())
      throw ModelError(fmt::format("{}: transition '{}' references an undeclared location", name_, t.label));
  }
  // A label must be consistently exported or internal.
  for (const auto& a : transitions_)
    for (const auto& b : transitions_)
      if (a.label == b.label && a.exported != b.exported)
        throw ModelError(fmt::format("{}: label '{}' is both exported and internal", name_, a.label));
}

// ---- SystemModel -----------------------------------------------------------

std::size_t SystemModel::add_component(AtomicComponent c) {
  invalidate();
  components_.push_back(std::move(c));
  return components_.size() - 1;
}

std::size_t SystemModel::add_interaction(Interaction i) {
  invalidate();
  interactions_.push_back(std::move(i));
  return interactions_.size() - 1;
}

void SystemModel::add_priority(std::size_t higher, std::size_t lower) {
  invalidate();
  priorities_.push_back({higher, lower});
}

std::optional<std::size_t> SystemModel::find_component(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < components_.size(); ++i)
    if (components_[i].name() == name) return i;
  return std::nullopt;
}

std::size_t SystemModel::component_index(std::string_view name) const {
  if (auto c = find_component(name)) return *c;
  throw ModelError(fmt::format("unknown component '{}'", name));
}

std::size_t SystemModel::connect(std::string name, std::vector<std::pair<std::string, std::string>> ports) {
  Interaction i;
  i.name = std::move(name);
  for (auto& [comp, label] : ports) i.ports.push_back({component_index(comp), std::move(label)});
  return add_interaction(std::move(i));
}

void SystemModel::validate() const {
  std::set<std::string> names;
  for (const auto& c : components_) {
    c.validate();
    if (!names.insert(c.name()).second) throw ModelError(fmt::format("duplicate component id '{}'", c.name()));
  }
  for (const auto& in : interactions_) {
    if (in.ports.empty()) throw ModelError(fmt::format("interaction '{}' has no participants", in.name));
    std::set<std::size_t> seen;
    for (const auto& p : in.ports) {
      if (p.component >= components_.size())
        throw ModelError(fmt::format("interaction '{}' references unknown component {}", in.name, p.component));
      if (!seen.insert(p.component).second)
        throw ModelError(fmt::format("interaction '{}' lists component '{}' twice", in.name,
                                     components_[p.component].name()));
      const auto& comp = components_[p.component];
      const auto& ts = comp.transitions();
      const bool found = std::any_of(ts.begin(), ts.end(), [&](const Transition& t) { return t.label == p.label; });
      if (!found)
        throw ModelError(fmt::format("interaction '{}': component '{}' has no transition '{}'", in.name, comp.name(),
                                     p.label));
      const bool exported =
          std::any_of(ts.begin(), ts.end(), [&](const Transition& t) { return t.label == p.label && t.exported; });
      if (!exported)
        throw ModelError(fmt::format("interaction '{}': transition '{}' of '{}' is not exported", in.name, p.label,
                                     comp.name()));
    }
    for (const auto& d : in.transfers) {
      if (d.from_port >= in.ports.size() || d.to_port >= in.ports.size())
        throw ModelError(fmt::format("interaction '{}': data transfer references an unknown port", in.name));
      const auto& from = components_[in.ports[d.from_port].component];
      const auto& to = components_[in.ports[d.to_port].component];
      if (d.from_var >= from.variable_names().size() || d.to_var >= to.variable_names().size())
        throw ModelError(fmt::format("interaction '{}': data transfer references an unknown variable", in.name));
    }
  }
  const std::size_t n = interactions_.size();
  std::vector<std::vector<std::size_t>> lower_of(n);
  for (const auto& p : priorities_) {
    if (p.higher >= n || p.lower >= n) throw ModelError("priority references an unknown interaction");
    if (p.higher == p.lower)
      throw ModelError(fmt::format("priority cycle at interaction '{}'", interactions_[p.higher].name));
    lower_of[p.higher].push_back(p.lower);
  }
  // Cycle check by iterative DFS colouring.
  std::vector<int> colour(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < lower_of[v].size()) {
        const std::size_t w = lower_of[v][next++];
        if (colour[w] == 1) throw ModelError(fmt::format("priority cycle through interaction '{}'", interactions_[w].name));
        if (colour[w] == 0) {
          colour[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        colour[v] = 2;
        stack.pop_back();
      }
    }
  }
}

void SystemModel::finalize() {
  validate();
  port_arcs_.assign(interactions_.size(), {});
  component_interactions_.assign(components_.size(), {});
  higher_.assign(interactions_.size(), {});
  for (std::size_t i = 0; i < interactions_.size(); ++i) {
    const auto& in = interactions_[i];
    port_arcs_[i].resize(in.ports.size());
    for (std::size_t p = 0; p < in.ports.size(); ++p) {
      const auto& comp = components_[in.ports[p].component];
      auto& per_loc = port_arcs_[i][p];
      per_loc.resize(comp.locations().size());
      for (std::size_t t = 0; t < comp.transitions().size(); ++t) {
        const auto& tr = comp.transitions()[t];
        if (tr.label == in.ports[p].label) per_loc[tr.source].push_back(t);
      }
      component_interactions_[in.ports[p].component].push_back(i);
    }
  }
  for (const auto& p : priorities_) higher_[p.lower].push_back(p.higher);
  finalized_ = true;
}

const std::vector<std::vector<std::size_t>>& SystemModel::port_arcs(std::size_t interaction, std::size_t port) const {
  return port_arcs_.at(interaction).at(port);
}

const std::vector<std::size_t>& SystemModel::interactions_of(std::size_t component) const {
  return component_interactions_.at(component);
}

const std::vector<std::size_t>& SystemModel::higher_than(std::size_t interaction) const {
  return higher_.at(interaction);
}

bool SystemModel::dominated(std::size_t lower, std::span<const std::size_t> candidates) const {
  for (std::size_t h : higher_.at(lower))
    if (std::find(candidates.begin(), candidates.end(), h) != candidates.end()) return true;
  return false;
}

// ---- Semantics -------------------------------------------------------------

namespace {

void require_finalized(const SystemModel& system) {
  if (!system.finalized()) throw std::logic_error("SystemModel used before finalize()");
}

Rng& rng_for(std::span<Rng> rngs, std::size_t component) { return rngs.size() == 1 ? rngs[0] : rngs[component]; }

bool guard_ok(const Transition& t, const ComponentState& cs) { return !t.guard || t.guard(VarView(cs.vars)); }

// Earliest enabled arc of a port at the component's current location.
std::optional<std::size_t> port_arc(const SystemModel& system, const SystemState& state, std::size_t interaction,
                                    std::size_t port) {
  const auto& in = system.interactions()[interaction];
  const auto& cs = state.components[in.ports[port].component];
  std::optional<std::size_t> best;
  for (std::size_t t : system.port_arcs(interaction, port)[cs.location]) {
    if (cs.deadline[t] == kNever) continue;
    if (!best || cs.deadline[t] < cs.deadline[*best]) best = t;
  }
  return best;
}

void refresh_deadlines(const SystemModel& system, SystemState& state, std::size_t c, std::optional<LocationId> left,
                       std::optional<std::size_t> fired, Rng& rng) {
  const auto& comp = system.components()[c];
  auto& cs = state.components[c];
  if (left) {
    for (std::size_t t : comp.outgoing(*left)) cs.deadline[t] = kNever;
  }
  for (std::size_t t : comp.outgoing(cs.location)) {
    const auto& tr = comp.transitions()[t];
    if (!guard_ok(tr, cs)) {
      cs.deadline[t] = kNever;
    } else if (left || (fired && *fired == t) || cs.deadline[t] == kNever) {
      cs.deadline[t] = state.now + tr.duration.sample(rng);
    }
  }
}

}  // namespace

SystemState initial_state(const SystemModel& system, std::span<Rng> rngs) {
  require_finalized(system);
  if (rngs.size() != 1 && rngs.size() != system.components().size())
    throw std::logic_error("initial_state: need one RNG or one per component");
  SystemState s;
  s.components.reserve(system.components().size());
  for (std::size_t c = 0; c < system.components().size(); ++c) {
    const auto& comp = system.components()[c];
    ComponentState cs;
    cs.location = comp.initial();
    cs.vars = comp.initial_values();
    cs.deadline.assign(comp.transitions().size(), kNever);
    s.components.push_back(std::move(cs));
    refresh_deadlines(system, s, c, std::nullopt, std::nullopt, rng_for(rngs, c));
  }
  return s;
}

SystemState initial_state(const SystemModel& system, Rng& rng) { return initial_state(system, std::span<Rng>(&rng, 1)); }

bool transition_enabled(const SystemModel& system, const SystemState& state, std::size_t component, std::size_t t) {
  const auto& tr = system.components().at(component).transitions().at(t);
  const auto& cs = state.components.at(component);
  return tr.source == cs.location && guard_ok(tr, cs);
}

std::vector<Step> enabled_internal(const SystemModel& system, const SystemState& state) {
  require_finalized(system);
  std::vector<Step> out;
  for (std::size_t c = 0; c < system.components().size(); ++c) {
    const auto& comp = system.components()[c];
    for (std::size_t t : comp.outgoing(state.components[c].location)) {
      if (!comp.transitions()[t].exported && transition_enabled(system, state, c, t)) out.push_back(Step::internal(c, t));
    }
  }
  return out;
}

std::vector<std::size_t> enabled_interactions(const SystemModel& system, const SystemState& state) {
  require_finalized(system);
  std::vector<std::size_t> enabled;
  for (std::size_t i = 0; i < system.interactions().size(); ++i) {
    const auto& in = system.interactions()[i];
    bool ok = true;
    for (std::size_t p = 0; p < in.ports.size() && ok; ++p) {
      const auto c = in.ports[p].component;
      bool any = false;
      for (std::size_t t : system.port_arcs(i, p)[state.components[c].location]) {
        if (transition_enabled(system, state, c, t)) {
          any = true;
          break;
        }
      }
      ok = any;
    }
    if (ok) enabled.push_back(i);
  }
  std::vector<std::size_t> out;
  for (std::size_t i : enabled)
    if (!system.dominated(i, enabled)) out.push_back(i);
  return out;
}

double ready_time(const SystemModel& system, const SystemState& state, const Step& step) {
  if (step.kind == Step::Kind::Internal) {
    const auto& cs = state.components.at(step.index);
    const auto& tr = system.components()[step.index].transitions().at(step.transition);
    if (tr.source != cs.location) return kNever;
    return cs.deadline[step.transition];
  }
  const auto& in = system.interactions().at(step.index);
  double t = -kNever;
  for (std::size_t p = 0; p < in.ports.size(); ++p) {
    auto arc = port_arc(system, state, step.index, p);
    if (!arc) return kNever;
    t = std::max(t, state.components[in.ports[p].component].deadline[*arc]);
  }
  return t;
}

double fire_in_place(const SystemModel& system, SystemState& state, const Step& step, std::span<Rng> rngs,
                     ExecutionObserver* observer, std::vector<std::size_t>* touched) {
  require_finalized(system);
  // (component, transition) pairs taking part in the step.
  std::array<std::pair<std::size_t, std::size_t>, 8> small{};
  std::vector<std::pair<std::size_t, std::size_t>> large;
  std::span<std::pair<std::size_t, std::size_t>> parts;

  double t = state.now;
  if (step.kind == Step::Kind::Internal) {
    const auto& comp = system.components().at(step.index);
    const auto& tr = comp.transitions().at(step.transition);
    const auto& cs = state.components[step.index];
    if (tr.exported) throw std::logic_error(fmt::format("{}: '{}' is exported and cannot fire alone", comp.name(), tr.label));
    if (tr.source != cs.location || cs.deadline[step.transition] == kNever)
      throw std::logic_error(fmt::format("{}: transition '{}' fired while disabled", comp.name(), tr.label));
    t = std::max(t, cs.deadline[step.transition]);
    small[0] = {step.index, step.transition};
    parts = std::span(small.data(), 1);
  } else {
    const auto& in = system.interactions().at(step.index);
    if (in.ports.size() > small.size()) {
      large.resize(in.ports.size());
      parts = large;
    } else {
      parts = std::span(small.data(), in.ports.size());
    }
    for (std::size_t p = 0; p < in.ports.size(); ++p) {
      auto arc = port_arc(system, state, step.index, p);
      if (!arc) throw std::logic_error(fmt::format("interaction '{}' fired while disabled", in.name));
      const auto c = in.ports[p].component;
      parts[p] = {c, *arc};
      t = std::max(t, state.components[c].deadline[*arc]);
    }
  }

  const double elapsed = t - state.now;
  state.now = t;
  if (observer) observer->on_step(step, t);

  std::array<std::optional<LocationId>, 8> left_small{};
  std::vector<std::optional<LocationId>> left_large(parts.size() > 8 ? parts.size() : 0);
  auto left = [&](std::size_t k) -> std::optional<LocationId>& { return parts.size() > 8 ? left_large[k] : left_small[k]; };

  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto [c, tid] = parts[k];
    const auto& comp = system.components()[c];
    const auto& tr = comp.transitions()[tid];
    auto& cs = state.components[c];
    if (tr.target != cs.location) {
      const auto& mode = comp.locations()[cs.location].mode;
      if (mode && observer && t > cs.entered_at) observer->on_interval(c, *mode, cs.entered_at, t);
      left(k) = cs.location;
      cs.location = tr.target;
      cs.entered_at = t;
    }
    if (observer && !tr.emits.empty()) observer->on_peripheral(c, tr.emits, t);
  }

  if (step.kind == Step::Kind::Interaction) {
    const auto& in = system.interactions()[step.index];
    // Read every source before writing, so transfers see pre-step values.
    std::array<double, 8> small_values{};
    std::vector<double> large_values(in.transfers.size() > small_values.size() ? in.transfers.size() : 0);
    double* values = large_values.empty() ? small_values.data() : large_values.data();
    for (std::size_t k = 0; k < in.transfers.size(); ++k) {
      const auto& d = in.transfers[k];
      values[k] = state.components[in.ports[d.from_port].component].vars[d.from_var];
    }
    for (std::size_t k = 0; k < in.transfers.size(); ++k) {
      const auto& d = in.transfers[k];
      state.components[in.ports[d.to_port].component].vars[d.to_var] = values[k];
    }
  }
  for (const auto& [c, tid] : parts) {
    const auto& tr = system.components()[c].transitions()[tid];
    if (tr.action) tr.action(VarSpan(state.components[c].vars));
  }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto [c, tid] = parts[k];
    refresh_deadlines(system, state, c, left(k), tid, rng_for(rngs, c));
    if (touched) touched->push_back(c);
  }
  return elapsed;
}

FireResult fire(const SystemModel& system, SystemState state, const Step& step, Rng& rng) {
  if (step.kind == Step::Kind::Interaction && system.dominated(step.index, enabled_interactions(system, state)))
    throw std::logic_error(fmt::format("interaction '{}' fired while a higher-priority one is enabled",
                                       system.interactions().at(step.index).name));
  const double elapsed = fire_in_place(system, state, step, std::span<Rng>(&rng, 1), nullptr);
  return FireResult{std::move(state), elapsed};
}

std::string describe_state(const SystemModel& system, const SystemState& state) {
  std::string out = fmt::format("t={:.6f}\n", state.now);
  for (std::size_t c = 0; c < system.components().size(); ++c) {
    const auto& comp = system.components()[c];
    const auto& cs = state.components[c];
    out += fmt::format("{} @ {}", comp.name(), comp.locations()[cs.location].name);
    for (std::size_t v = 0; v < cs.vars.size(); ++v) out += fmt::format(" {}={}", comp.variable_names()[v], cs.vars[v]);
    out += '\n';
  }
  return out;
}

}  // namespace iesim
