#include "layersim/mat.hpp"

#include <algorithm>
#include <cmath>

namespace layersim {

namespace {
const std::string kSource(device_id::kMat);
}

void MatConfig::validate() const {
  if (!(std::isfinite(actuation_threshold_kg) && actuation_threshold_kg > 0.0)) {
    throw SimError(ErrorCode::ConfigInvalid, "actuation_threshold_kg must be > 0");
  }
  if (poll_period_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "poll_period_ms must be >= 1");
  if (!std::isfinite(cable_m)) throw SimError(ErrorCode::ConfigInvalid, "cable_m must be finite");
}

std::string_view to_string(MatStatus status) noexcept {
  switch (status) {
    case MatStatus::Ok: return "OK";
    case MatStatus::Actuated: return "ACTUATED";
    case MatStatus::Fault: return "FAULT";
  }
  return "UNKNOWN";
}

PollResult classify(const MatCircuit& circuit) {
  const bool open = std::any_of(circuit.wires.begin(), circuit.wires.end(),
                                [](WireCondition w) { return w == WireCondition::Open; });
  PollResult r;
  if (open) {
    r.status = MatStatus::Fault;
  } else if (circuit.plates_bridged) {
    r.status = MatStatus::Actuated;
  }
  r.stop = to_level(r.status != MatStatus::Ok);
  return r;
}

MatMonitor::MatMonitor(MatConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void MatMonitor::apply_load(double kg, SimTime /*at*/) {
  if (!(kg >= 0.0)) throw SimError(ErrorCode::NegativeLoad, "mat load must be >= 0 kg");
  circuit_.load_kg = kg;
  circuit_.plates_bridged = kg >= cfg_.actuation_threshold_kg;
}

void MatMonitor::set_wire(int wire, WireCondition condition, SimTime /*at*/) {
  if (wire < 1 || wire > 4) throw SimError(ErrorCode::BadWireIndex, "wire index must be 1..4");
  circuit_.wires[static_cast<std::size_t>(wire - 1)] = condition;
}

PollResult MatMonitor::poll(SimTime /*at*/) {
  if (!powered_) throw SimError(ErrorCode::PowerOff, "mat monitor is unpowered");
  last_ = classify(circuit_);
  return last_;
}

LogicLevel MatMonitor::stop_signal() const noexcept { return powered_ ? last_.stop : LogicLevel::High; }

void MatDevice::on_power(PowerState state, Engine& engine) {
  ++epoch_;
  monitor_.set_powered(state == PowerState::On);
  if (state == PowerState::On) {
    poll(engine, true);
    schedule_poll(engine);
  } else {
    engine.set_line("mat.stop", monitor_.stop_signal());
    engine.emit(kSource, "POWER_OFF", "stop=HIGH");
  }
}

void MatDevice::deliver(const TimedStimulus& stimulus, Engine& engine) {
  const SimTime now = engine.now();
  if (const auto* load = std::get_if<MatLoad>(&stimulus.action)) {
    monitor_.apply_load(load->kg, now);
  } else if (std::holds_alternative<MatUnload>(stimulus.action)) {
    monitor_.apply_load(0.0, now);
  } else if (const auto* wire = std::get_if<MatWire>(&stimulus.action)) {
    monitor_.set_wire(wire->wire, wire->condition, now);
  }
}

void MatDevice::poll(Engine& engine, bool initial) {
  const MatStatus before = monitor_.last_status();
  const auto result = monitor_.poll(engine.now());
  engine.set_line("mat.stop", result.stop);
  if (initial) {
    engine.emit(kSource, "POWER_ON", "status=" + std::string(to_string(result.status)));
  } else if (result.status != before) {
    engine.emit(kSource, "MAT_STATUS", std::string(to_string(result.status)) + " stop=" + std::string(to_string(result.stop)));
  }
}

void MatDevice::schedule_poll(Engine& engine) {
  engine.schedule_timer(engine.now() + monitor_.config().poll_period_ms, [this, epoch = epoch_](Engine& e) {
    if (epoch != epoch_) return;
    poll(e, false);
    schedule_poll(e);
  });
}

}  // namespace layersim
