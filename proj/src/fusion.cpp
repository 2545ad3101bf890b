#include "layersim/fusion.hpp"

namespace layersim {

namespace {
const std::string kSource(device_id::kAlarm);
}

AlarmDrive latch_step(const AlarmDrive& drive, LogicLevel gated, SimTime at) {
  if (!is_high(gated) || drive.latched) return drive;
  return AlarmDrive{LogicLevel::High, true, at};
}

AlarmDrive reset_alarm(const AlarmDrive& /*drive*/) { return AlarmDrive{}; }

std::string_view to_string(SinkKind kind) noexcept { return kind == SinkKind::Horn ? "horn" : "beacon"; }

void SinkConfig::validate() const {
  if (blink_period_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "blink_period_ms must be >= 1");
}

std::vector<SimEvent> render(SimTime latched_at, std::optional<SimTime> cleared_at, SimTime horizon,
                             const SinkConfig& sink) {
  std::vector<SimEvent> out;
  if (latched_at > horizon) return out;
  if (sink.kind == SinkKind::Horn) {
    out.emplace_back(latched_at, kSource, "HORN_ON");
    if (cleared_at && *cleared_at <= horizon) out.emplace_back(*cleared_at, kSource, "HORN_OFF");
    return out;
  }
  for (SimTime t = latched_at; t <= horizon && (!cleared_at || t < *cleared_at); t += sink.blink_period_ms) {
    out.emplace_back(t, kSource, "BLINK");
  }
  return out;
}

AlarmDevice::AlarmDevice(SinkConfig sink) : sink_(sink) { sink_.validate(); }

FusionInputs AlarmDevice::inputs(const Engine& engine) const {
  return FusionInputs{
      .mat_stop = engine.line("mat.stop"),
      .ac_alarm = engine.line("access.alarm"),
      .armed = powered_ && !is_high(engine.line("access.grant")),
  };
}

void AlarmDevice::on_power(PowerState state, Engine& engine) {
  if (state == PowerState::On) {
    powered_ = true;
    drive_ = AlarmDrive{};
    engine.emit(kSource, "POWER_ON", "sink=" + std::string(to_string(sink_.kind)));
  } else {
    clear(engine, "power_off");
    powered_ = false;
    engine.emit(kSource, "POWER_OFF");
  }
  engine.set_line("alarm.drive", drive_.driven);
}

void AlarmDevice::deliver(const TimedStimulus& stimulus, Engine& engine) {
  if (!std::holds_alternative<AlarmReset>(stimulus.action)) return;
  if (!powered_) {
    engine.emit(kSource, "IGNORED", "unpowered");
  } else if (!drive_.latched) {
    engine.emit(kSource, "IGNORED", "not_latched");
  } else {
    clear(engine, "reset");
  }
}

void AlarmDevice::settle(Engine& engine) {
  if (!powered_) return;
  const auto in = inputs(engine);
  const auto next = latch_step(drive_, gate(in), engine.now());
  if (next.latched && !drive_.latched) {
    drive_ = next;
    ever_latched_ = true;
    ++latch_id_;
    engine.emit(kSource, "ALARM_LATCHED",
                "mat_stop=" + std::string(to_string(in.mat_stop)) + " ac_alarm=" + std::string(to_string(in.ac_alarm)) +
                    " armed=" + (in.armed ? "1" : "0"));
    if (sink_.kind == SinkKind::Horn) {
      engine.emit(kSource, "HORN_ON");
    } else {
      blink(engine, latch_id_);
    }
  }
  drive_ = next;
  engine.set_line("alarm.drive", drive_.driven);
}

void AlarmDevice::clear(Engine& engine, const char* why) {
  if (!drive_.latched) return;
  if (sink_.kind == SinkKind::Horn) engine.emit(kSource, "HORN_OFF");
  engine.emit(kSource, "ALARM_CLEARED", why);
  drive_ = reset_alarm(drive_);
  ++latch_id_;
  engine.set_line("alarm.drive", drive_.driven);
}

void AlarmDevice::blink(Engine& engine, std::uint64_t latch_id) {
  engine.emit(kSource, "BLINK");
  engine.schedule_timer(engine.now() + sink_.blink_period_ms, [this, latch_id](Engine& e) {
    if (latch_id == latch_id_ && drive_.latched) blink(e, latch_id);
  });
}

}  // namespace layersim
