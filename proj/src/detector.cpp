#include "layersim/detector.hpp"

#include <algorithm>
#include <cmath>

namespace layersim {

void DetectorConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(sensitivity_threshold)) throw SimError(ErrorCode::ConfigInvalid, "sensitivity_threshold must be > 0");
  if (!positive(coupling_k)) throw SimError(ErrorCode::ConfigInvalid, "coupling_k must be > 0");
  if (!positive(min_distance_cm)) throw SimError(ErrorCode::ConfigInvalid, "min_distance_cm must be > 0");
  if (!std::isfinite(supply_volts) || !std::isfinite(alarm_watts)) {
    throw SimError(ErrorCode::ConfigInvalid, "detector supply/alarm ratings must be finite");
  }
}

double coupling_signal(const MetalTarget& target, const DetectorConfig& cfg) {
  if (target.mass_g <= 0.0) return 0.0;
  const double d = std::max(target.distance_cm, cfg.min_distance_cm);
  return cfg.coupling_k * target.mass_g / (d * d * d);
}

MetalDetector::MetalDetector(DetectorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

ScanResult MetalDetector::scan(const MetalTarget& target, SimTime at) const {
  if (!powered_) throw SimError(ErrorCode::PowerOff, "metal detector is unpowered");
  ScanResult result;
  result.signal = coupling_signal(target, cfg_);
  if (result.signal >= cfg_.sensitivity_threshold) {
    result.verdict = Detection::Detected;
    result.local_alarm.emplace(at, std::string(device_id::kDetector), "LOCAL_ALARM",
                               "signal=" + format_real(result.signal));
  }
  return result;
}

void DetectorDevice::on_power(PowerState state, Engine& engine) {
  detector_.set_powered(state == PowerState::On);
  engine.emit(std::string(device_id::kDetector), state == PowerState::On ? "POWER_ON" : "POWER_OFF",
              "threshold=" + format_real(detector_.config().sensitivity_threshold));
}

void DetectorDevice::deliver(const TimedStimulus& stimulus, Engine& engine) {
  const auto* scan = std::get_if<DetectorScan>(&stimulus.action);
  if (scan == nullptr) return;
  if (!detector_.powered()) {
    engine.emit(std::string(device_id::kDetector), "IGNORED", "unpowered");
    return;
  }
  auto result = detector_.scan({scan->mass_g, scan->distance_cm}, engine.now());
  if (result.local_alarm) {
    engine.emit(result.local_alarm->source(), result.local_alarm->kind(), result.local_alarm->detail());
  }
}

}  // namespace layersim
