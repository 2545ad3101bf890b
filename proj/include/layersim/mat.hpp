#pragma once

#include <array>

#include "layersim/core.hpp"

namespace layersim {

struct MatConfig {
  double actuation_threshold_kg = 15.0;
  SimTime poll_period_ms = 50;
  double cable_m = 6.0;

  void validate() const;
};

enum class MatStatus { Ok, Actuated, Fault };

std::string_view to_string(MatStatus status) noexcept;

/// Two electrode plates, two wires each (1-2 upper, 3-4 lower).
struct MatCircuit {
  std::array<WireCondition, 4> wires{WireCondition::Intact, WireCondition::Intact, WireCondition::Intact,
                                     WireCondition::Intact};
  double load_kg = 0.0;
  bool plates_bridged = false;
};

struct PollResult {
  MatStatus status = MatStatus::Ok;
  LogicLevel stop = LogicLevel::Low;
};

/// Verdict for a circuit: any open wire is a FAULT, otherwise bridged
/// plates are ACTUATED.
PollResult classify(const MatCircuit& circuit);

class MatMonitor {
 public:
  explicit MatMonitor(MatConfig cfg);

  /// Throws SimError(NegativeLoad).
  void apply_load(double kg, SimTime at);
  /// `wire` is 1-based. Throws SimError(BadWireIndex).
  void set_wire(int wire, WireCondition condition, SimTime at);
  /// Throws SimError(PowerOff) when unpowered.
  PollResult poll(SimTime at);

  void set_powered(bool powered) noexcept { powered_ = powered; }
  bool powered() const noexcept { return powered_; }

  /// Stop line as the fusion layer sees it: HIGH while unpowered, else the
  /// result of the most recent poll.
  LogicLevel stop_signal() const noexcept;
  MatStatus last_status() const noexcept { return last_.status; }

  const MatCircuit& circuit() const noexcept { return circuit_; }
  const MatConfig& config() const noexcept { return cfg_; }

 private:
  MatConfig cfg_;
  MatCircuit circuit_;
  PollResult last_;
  bool powered_ = false;
};

/// Polls the monitor every poll_period_ms while powered and publishes
/// `mat.stop`.
class MatDevice : public Device {
 public:
  explicit MatDevice(MatConfig cfg) : monitor_(cfg) {}

  void deliver(const TimedStimulus& stimulus, Engine& engine) override;
  void on_power(PowerState state, Engine& engine) override;

  const MatMonitor& monitor() const noexcept { return monitor_; }

 private:
  void poll(Engine& engine, bool initial);
  void schedule_poll(Engine& engine);

  MatMonitor monitor_;
  std::uint64_t epoch_ = 0;
};

}  // namespace layersim
