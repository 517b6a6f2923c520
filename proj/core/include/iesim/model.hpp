#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iesim/distribution.hpp"
#include "iesim/rng.hpp"

namespace iesim {

enum class OperatingMode : std::uint8_t { LPM = 0, CPU = 1, Tx = 2, Rx = 3 };
inline constexpr std::size_t kModeCount = 4;
inline constexpr std::array<OperatingMode, kModeCount> kAllModes{OperatingMode::LPM, OperatingMode::CPU,
                                                                 OperatingMode::Tx, OperatingMode::Rx};

std::string_view to_string(OperatingMode mode) noexcept;
std::optional<OperatingMode> parse_mode(std::string_view text) noexcept;
inline constexpr std::size_t index(OperatingMode m) noexcept { return static_cast<std::size_t>(m); }

using LocationId = std::size_t;
using VarView = std::span<const double>;
using VarSpan = std::span<double>;
using Guard = std::function<bool(VarView)>;
using Action = std::function<void(VarSpan)>;

struct Location {
  std::string name;
  std::optional<OperatingMode> mode;  // nullopt for Off and for non-device locations
};

struct Transition {
  std::string label;
  LocationId source = 0;
  LocationId target = 0;
  Guard guard;  // empty means always enabled
  Distribution duration;
  bool exported = false;
  Action action;  // applied after data transfer; may be empty
  std::string emits;  // peripheral event raised when the transition fires; may be empty
};

class AtomicComponent {
 public:
  explicit AtomicComponent(std::string name);

  LocationId add_location(std::string name, std::optional<OperatingMode> mode = std::nullopt);
  void set_initial(LocationId loc);
  std::size_t add_variable(std::string name, double initial = 0.0);
  std::size_t add_transition(Transition t);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Location>& locations() const noexcept { return locations_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const std::vector<std::string>& variable_names() const noexcept { return var_names_; }
  const std::vector<double>& initial_values() const noexcept { return var_init_; }
  LocationId initial() const;

  std::optional<LocationId> find_location(std::string_view name) const noexcept;
  std::optional<std::size_t> find_variable(std::string_view name) const noexcept;
  std::size_t variable(std::string_view name) const;  // throws ModelError
  // Transition indices leaving `loc`, in declaration order.
  const std::vector<std::size_t>& outgoing(LocationId loc) const { return outgoing_.at(loc); }
  // Distinct exported labels in declaration order.
  std::vector<std::string> exported_labels() const;
  bool has_modes() const noexcept;

  // Peripheral events and mode time of this component are booked on the
  // ledger of `owner` (default: the component itself).
  void set_owner(std::string owner) { owner_ = std::move(owner); }
  const std::string& owner() const noexcept { return owner_.empty() ? name_ : owner_; }

  void validate() const;

 private:
  std::string name_;
  std::string owner_;
  std::vector<Location> locations_;
  std::vector<Transition> transitions_;
  std::vector<std::string> var_names_;
  std::vector<double> var_init_;
  std::optional<LocationId> initial_;
  std::vector<std::vector<std::size_t>> outgoing_;
};

struct Port {
  std::size_t component = 0;
  std::string label;
};

// Copies from.var into to.var, where from/to index into Interaction::ports.
struct DataTransfer {
  std::size_t from_port = 0;
  std::size_t from_var = 0;
  std::size_t to_port = 0;
  std::size_t to_var = 0;
};

struct Interaction {
  std::string name;
  std::vector<Port> ports;
  std::vector<DataTransfer> transfers;
};

struct Priority {
  std::size_t higher = 0;
  std::size_t lower = 0;
};

class SystemModel {
 public:
  std::size_t add_component(AtomicComponent c);
  std::size_t add_interaction(Interaction i);
  void add_priority(std::size_t higher, std::size_t lower);

  // Convenience: resolves names and variable names into an interaction.
  std::size_t connect(std::string name, std::vector<std::pair<std::string, std::string>> ports);

  const std::vector<AtomicComponent>& components() const noexcept { return components_; }
  const std::vector<Interaction>& interactions() const noexcept { return interactions_; }
  const std::vector<Priority>& priorities() const noexcept { return priorities_; }
  const AtomicComponent& component(std::size_t i) const { return components_.at(i); }
  std::optional<std::size_t> find_component(std::string_view name) const noexcept;
  std::size_t component_index(std::string_view name) const;  // throws ModelError

  // Checks every structural invariant and builds the lookup tables. Mutating
  // the model afterwards invalidates it again.
  void finalize();
  bool finalized() const noexcept { return finalized_; }
  void validate() const;

  // Lookup tables, available after finalize().
  // port_arcs(i, p)[loc] lists transitions of port p's component with the port's label leaving loc.
  const std::vector<std::vector<std::size_t>>& port_arcs(std::size_t interaction, std::size_t port) const;
  const std::vector<std::size_t>& interactions_of(std::size_t component) const;
  bool dominated(std::size_t lower, std::span<const std::size_t> candidates) const;
  const std::vector<std::size_t>& higher_than(std::size_t interaction) const;

 private:
  void invalidate() noexcept { finalized_ = false; }

  std::vector<AtomicComponent> components_;
  std::vector<Interaction> interactions_;
  std::vector<Priority> priorities_;
  bool finalized_ = false;
  std::vector<std::vector<std::vector<std::vector<std::size_t>>>> port_arcs_;
  std::vector<std::vector<std::size_t>> component_interactions_;
  std::vector<std::vector<std::size_t>> higher_;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct ComponentState {
  LocationId location = 0;
  std::vector<double> vars;
  double entered_at = 0.0;
  // Per transition; kNever when the transition is not enabled. A deadline is
  // drawn when a transition becomes enabled and kept while it stays enabled.
  std::vector<double> deadline;
};

struct SystemState {
  double now = 0.0;
  std::vector<ComponentState> components;
};

struct Step {
  enum class Kind : std::uint8_t { Internal, Interaction };
  Kind kind = Kind::Internal;
  std::size_t index = 0;       // component (Internal) or interaction
  std::size_t transition = 0;  // Internal only

  static Step internal(std::size_t component, std::size_t transition) { return {Kind::Internal, component, transition}; }
  static Step interaction(std::size_t i) { return {Kind::Interaction, i, 0}; }
  friend bool operator==(const Step&, const Step&) = default;
};

// Receives the side effects of firing steps.
class ExecutionObserver {
 public:
  virtual ~ExecutionObserver() = default;
  // A component left a mode-carrying location after occupying it for [start, end).
  virtual void on_interval(std::size_t component, OperatingMode mode, double start, double end) = 0;
  virtual void on_peripheral(std::size_t /*component*/, const std::string& /*event*/, double /*time*/) {}
  virtual void on_step(const Step& /*step*/, double /*time*/) {}
};

SystemState initial_state(const SystemModel& system, Rng& rng);
// Same, with one RNG per component (see derive_seed).
SystemState initial_state(const SystemModel& system, std::span<Rng> component_rngs);

bool transition_enabled(const SystemModel& system, const SystemState& state, std::size_t component, std::size_t t);
// Enabled internal transitions as steps.
std::vector<Step> enabled_internal(const SystemModel& system, const SystemState& state);
// Interactions whose every port has an enabled transition, after priority filtering.
std::vector<std::size_t> enabled_interactions(const SystemModel& system, const SystemState& state);

// Time at which the step can fire (latest participant deadline).
double ready_time(const SystemModel& system, const SystemState& state, const Step& step);

struct FireResult {
  SystemState state;
  double elapsed = 0.0;
};

// Fires an enabled step. Throws std::logic_error if it is not enabled.
FireResult fire(const SystemModel& system, SystemState state, const Step& step, Rng& rng);

// In-place variant used by the engine; priorities are the caller's concern.
// Returns the elapsed time. Components touched by the step are appended to
// `touched`.
double fire_in_place(const SystemModel& system, SystemState& state, const Step& step, std::span<Rng> component_rngs,
                     ExecutionObserver* observer, std::vector<std::size_t>* touched = nullptr);

std::string describe_state(const SystemModel& system, const SystemState& state);

}  // namespace iesim
