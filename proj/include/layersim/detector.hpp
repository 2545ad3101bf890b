#pragma once

#include <optional>

#include "layersim/core.hpp"

namespace layersim {

struct DetectorConfig {
  double sensitivity_threshold = 0.5;
  double coupling_k = 1.0;
  double min_distance_cm = 1.0;
  double supply_volts = 9.0;
  double alarm_watts = 1.0;

  void validate() const;
};

struct MetalTarget {
  double mass_g = 0.0;
  double distance_cm = 0.0;
};

enum class Detection { Clear, Detected };

struct ScanResult {
  Detection verdict = Detection::Clear;
  double signal = 0.0;
  std::optional<SimEvent> local_alarm;
};

/// Inverse-cube coupling: k * mass / max(distance, min_distance)^3.
double coupling_signal(const MetalTarget& target, const DetectorConfig& cfg);

/// Walk-through or hand-held detector with its own sounder. It has no
/// output line; nothing it does reaches the alarm fusion gate.
class MetalDetector {
 public:
  explicit MetalDetector(DetectorConfig cfg);

  void set_powered(bool powered) noexcept { powered_ = powered; }
  bool powered() const noexcept { return powered_; }

  /// Throws SimError(PowerOff) when unpowered.
  ScanResult scan(const MetalTarget& target, SimTime at) const;

  const DetectorConfig& config() const noexcept { return cfg_; }

 private:
  DetectorConfig cfg_;
  bool powered_ = false;
};

class DetectorDevice : public Device {
 public:
  explicit DetectorDevice(DetectorConfig cfg) : detector_(cfg) {}

  void deliver(const TimedStimulus& stimulus, Engine& engine) override;
  void on_power(PowerState state, Engine& engine) override;

  const MetalDetector& detector() const noexcept { return detector_; }

 private:
  MetalDetector detector_;
};

}  // namespace layersim
