#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

#include "iesim/distribution.hpp"
#include "iesim/energy.hpp"
#include "iesim/model.hpp"

namespace iesim {

// Duration distribution per arc of the energy automaton, keyed by arc name.
// Arcs sharing a label but leaving different locations are keyed
// "label.Source" (initDutyCycle.Tx, initDutyCycle.Rx).
struct ModeTimingModel {
  std::map<std::string, Distribution, std::less<>> arcs;
  // Period of the OS duty-cycle clock and the channel checks it stands for.
  Distribution clock = Distribution::dirac(1.0);
  int checks_per_tick = 1;

  bool has(std::string_view arc) const { return arcs.find(arc) != arcs.end(); }
  const Distribution& at(std::string_view arc) const;  // ModelError "no duration for <arc>"
  double mean(std::string_view arc) const { return at(arc).mean(); }
};

inline constexpr std::array<std::string_view, 7> kCoreArcs{
    "activate", "process", "sndPacket", "recv", "initDutyCycle.Tx", "initDutyCycle.Rx", "tick"};
// Radio duty-cycling arcs that the minimal automaton leaves out.
inline constexpr std::array<std::string_view, 3> kDutyCycleArcs{"wakeup", "checkDone", "rxNext"};

struct AutomatonOptions {
  // Adds wakeup (LPM->Rx), checkDone (Rx->LPM) and rxNext (Rx self-loop
  // draining queued receptions).
  bool duty_cycle_arcs = false;
  // Received messages carrying relay_in = 1 are queued for forwarding.
  bool forward_relays = false;
  // Value placed in relay_out for messages this device sends.
  bool marks_relay = false;
  // Peripheral event raised on every `process` (empty: none).
  std::string process_event;
};

namespace var {
inline constexpr std::string_view outbox = "outbox";
inline constexpr std::string_view ready = "ready";
inline constexpr std::string_view rx_pending = "rx_pending";
inline constexpr std::string_view listening = "listening";
inline constexpr std::string_view checks_due = "checks_due";
inline constexpr std::string_view in_msgs = "in_msgs";
inline constexpr std::string_view in_checks = "in_checks";
inline constexpr std::string_view relay_in = "relay_in";
inline constexpr std::string_view relay_out = "relay_out";
inline constexpr std::string_view await_reply = "await_reply";
}  // namespace var

AtomicComponent build_energy_automaton(const DeviceProfile& profile, const ModeTimingModel& timing,
                                       const AutomatonOptions& options = {}, std::string name = {});

}  // namespace iesim
