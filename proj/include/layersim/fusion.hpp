#pragma once

// OR-gate fusion of the mat stop signal and the access controller alarm
// line, with arming, latching and the alarm sink.

#include <optional>
#include <vector>

#include "layersim/core.hpp"

namespace layersim {

struct FusionInputs {
  LogicLevel mat_stop = LogicLevel::Low;
  LogicLevel ac_alarm = LogicLevel::Low;
  bool armed = true;
};

/// HIGH iff (armed AND mat_stop) OR ac_alarm.
constexpr LogicLevel gate(const FusionInputs& in) noexcept {
  return to_level((in.armed && is_high(in.mat_stop)) || is_high(in.ac_alarm));
}

struct AlarmDrive {
  LogicLevel driven = LogicLevel::Low;
  bool latched = false;
  std::optional<SimTime> since;

  bool operator==(const AlarmDrive&) const = default;
};

AlarmDrive latch_step(const AlarmDrive& drive, LogicLevel gated, SimTime at);
AlarmDrive reset_alarm(const AlarmDrive& drive);

enum class SinkKind { Horn, Beacon };

std::string_view to_string(SinkKind kind) noexcept;

struct SinkConfig {
  SinkKind kind = SinkKind::Horn;
  SimTime blink_period_ms = 500;

  void validate() const;
};

/// Sink output for one latch interval [latched_at, cleared_at). Without a
/// clear, events run through `horizon` inclusive. HORN yields HORN_ON and
/// HORN_OFF; BEACON yields a BLINK every blink_period_ms.
std::vector<SimEvent> render(SimTime latched_at, std::optional<SimTime> cleared_at, SimTime horizon,
                             const SinkConfig& sink);

/// Reads `mat.stop`, `access.alarm`, `access.grant` after every engine step,
/// latches the gate output and drives the sink.
class AlarmDevice : public Device {
 public:
  explicit AlarmDevice(SinkConfig sink);

  void deliver(const TimedStimulus& stimulus, Engine& engine) override;
  void on_power(PowerState state, Engine& engine) override;
  void settle(Engine& engine) override;

  FusionInputs inputs(const Engine& engine) const;
  const AlarmDrive& drive() const noexcept { return drive_; }
  bool ever_latched() const noexcept { return ever_latched_; }
  bool powered() const noexcept { return powered_; }

 private:
  void clear(Engine& engine, const char* why);
  void blink(Engine& engine, std::uint64_t latch_id);

  SinkConfig sink_;
  AlarmDrive drive_;
  bool powered_ = false;
  bool ever_latched_ = false;
  std::uint64_t latch_id_ = 0;
};

}  // namespace layersim
