#include "iesim/energy_automaton.hpp"

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

const Distribution& ModeTimingModel::at(std::string_view arc) const {
  auto it = arcs.find(arc);
  if (it == arcs.end()) throw ModelError(fmt::format("no duration for {}", arc));
  return it->second;
}

AtomicComponent build_energy_automaton(const DeviceProfile& profile, const ModeTimingModel& timing,
                                       const AutomatonOptions& options, std::string name) {
  for (auto arc : kCoreArcs) (void)timing.at(arc);
  if (options.duty_cycle_arcs)
    for (auto arc : kDutyCycleArcs) (void)timing.at(arc);

  AtomicComponent c(name.empty() ? profile.name : std::move(name));
  const auto off = c.add_location("Off");
  const auto lpm = c.add_location("LPM", OperatingMode::LPM);
  const auto cpu = c.add_location("CPU", OperatingMode::CPU);
  const auto tx = c.add_location("Tx", OperatingMode::Tx);
  const auto rx = c.add_location("Rx", OperatingMode::Rx);
  c.set_initial(off);

  const auto outbox = c.add_variable(std::string(var::outbox));
  const auto ready = c.add_variable(std::string(var::ready));
  const auto rx_pending = c.add_variable(std::string(var::rx_pending));
  const auto listening = c.add_variable(std::string(var::listening));
  const auto checks_due = c.add_variable(std::string(var::checks_due));
  const auto in_msgs = c.add_variable(std::string(var::in_msgs));
  const auto in_checks = c.add_variable(std::string(var::in_checks));
  const auto relay_in = c.add_variable(std::string(var::relay_in));
  c.add_variable(std::string(var::relay_out), options.marks_relay ? 1.0 : 0.0);
  const auto await_reply = c.add_variable(std::string(var::await_reply));

  const bool queue = options.duty_cycle_arcs;
  const bool forward = options.forward_relays;
  Action on_recv = [=](VarSpan v) {
    v[rx_pending] = queue ? v[rx_pending] + 1 : 1;
    if (forward && v[relay_in] > 0) v[outbox] += 1;
    v[await_reply] = 0;
  };

  c.add_transition({"activate", off, lpm, {}, timing.at("activate"), false, {}, {}});
  c.add_transition({"process", lpm, cpu, [=](VarView v) { return v[outbox] > 0; }, timing.at("process"), false,
                    [=](VarSpan v) { v[ready] = 1; }, options.process_event});
  Action on_send = [=](VarSpan v) {
    v[ready] = 0;
    v[outbox] -= 1;
  };
  Guard can_send = [=](VarView v) { return v[ready] > 0; };
  c.add_transition({"sndPacket", cpu, tx, can_send, timing.at("sndPacket"), true, on_send, {}});
  c.add_transition({"sndPacket", rx, tx, can_send, timing.at("sndPacket"), true, on_send, {}});
  c.add_transition({"recv", lpm, rx, {}, timing.at("recv"), true, on_recv, {}});
  c.add_transition({"recv", rx, rx, {}, timing.at("recv"), true, on_recv, {}});
  c.add_transition({"recv", tx, rx, [=](VarView v) { return v[await_reply] > 0; }, timing.at("recv"), true, on_recv, {}});
  c.add_transition({"initDutyCycle", tx, lpm, {}, timing.at("initDutyCycle.Tx"), false, {}, {}});
  c.add_transition({"initDutyCycle", rx, lpm,
                    [=](VarView v) { return v[listening] == 0 && v[rx_pending] <= 1; },
                    timing.at("initDutyCycle.Rx"), false, [=](VarSpan v) { v[rx_pending] = 0; }, {}});
  c.add_transition({"tick", lpm, lpm, {}, timing.at("tick"), true,
                    [=](VarSpan v) {
                      v[outbox] += v[in_msgs];
                      v[checks_due] += v[in_checks];
                      v[in_msgs] = 0;
                      v[in_checks] = 0;
                    },
                    {}});

  if (options.duty_cycle_arcs) {
    c.add_transition({"wakeup", lpm, rx, [=](VarView v) { return v[checks_due] > 0; }, timing.at("wakeup"), false,
                      [=](VarSpan v) {
                        v[checks_due] = 0;
                        v[listening] = 1;
                      },
                      {}});
    c.add_transition({"checkDone", rx, lpm, [=](VarView v) { return v[listening] > 0 && v[rx_pending] == 0; },
                      timing.at("checkDone"), false, [=](VarSpan v) { v[listening] = 0; }, {}});
    c.add_transition({"rxNext", rx, rx,
                      [=](VarView v) { return v[rx_pending] > 1 || (v[rx_pending] == 1 && v[listening] > 0); },
                      timing.at("rxNext"), false, [=](VarSpan v) { v[rx_pending] -= 1; }, {}});
  }
  c.validate();
  return c;
}

}  // namespace iesim
