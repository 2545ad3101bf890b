#pragma once

// Discrete-event core: millisecond clock, ordered stimulus/timer queue,
// named logic lines and the debounce filter shared by the device models.

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "layersim/stimulus.hpp"

namespace layersim {

using SimTime = std::uint64_t;

inline constexpr SimTime kForever = std::numeric_limits<SimTime>::max();

enum class LogicLevel : std::uint8_t { Low, High };

constexpr LogicLevel to_level(bool high) noexcept { return high ? LogicLevel::High : LogicLevel::Low; }
constexpr bool is_high(LogicLevel level) noexcept { return level == LogicLevel::High; }
std::string_view to_string(LogicLevel level) noexcept;

enum class ErrorCode {
  ScheduleInPast,
  UnknownDevice,
  UnorderedSamples,
  InvalidEvent,
  PowerOff,
  Unpowered,
  MalformedPin,
  PersistFail,
  NegativeLoad,
  BadWireIndex,
  ConfigInvalid,
  StoreIo,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// One line of the audit trail. Fields are validated on construction so
/// that the tab-separated log can never be corrupted at write time.
class SimEvent {
 public:
  SimEvent(SimTime at, std::string source, std::string kind, std::string detail = {});

  SimTime at() const noexcept { return at_; }
  const std::string& source() const noexcept { return source_; }
  const std::string& kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

  bool operator==(const SimEvent&) const = default;

 private:
  SimTime at_;
  std::string source_;
  std::string kind_;
  std::string detail_;
};

struct TimedStimulus {
  SimTime at = 0;
  std::string target;
  Action action;

  bool operator==(const TimedStimulus&) const = default;
};

// ---------------------------------------------------------------------------
// Debounce

struct DebounceConfig {
  SimTime stable_ms = 20;
};

struct Sample {
  SimTime at = 0;
  LogicLevel level = LogicLevel::Low;

  bool operator==(const Sample&) const = default;
};

/// Stability-window filter. A raw level is accepted once it has held
/// continuously for `stable_ms`; the accepted edge is stamped at
/// transition time + stable_ms.
class DebounceFilter {
 public:
  explicit DebounceFilter(DebounceConfig cfg, LogicLevel initial = LogicLevel::Low);

  /// Feeds a raw sample. Returns an edge if a pending level matured at or
  /// before `at` (only possible when `at` equals the deadline).
  std::optional<Sample> feed(SimTime at, LogicLevel level);

  /// Accepts the pending level if it has matured by `now`.
  std::optional<Sample> poll(SimTime now);

  /// Time at which the pending raw level matures, if one is pending.
  std::optional<SimTime> deadline() const;

  LogicLevel accepted() const noexcept { return accepted_; }
  LogicLevel raw() const noexcept { return raw_; }

 private:
  DebounceConfig cfg_;
  LogicLevel accepted_;
  LogicLevel raw_;
  SimTime raw_since_ = 0;
};

/// Batch form of DebounceFilter. The first sample sets the initial accepted
/// level; the final sample's level is held indefinitely.
std::vector<Sample> debounce(std::span<const Sample> samples, DebounceConfig cfg);

// ---------------------------------------------------------------------------
// Engine

class Engine;

class Device {
 public:
  virtual ~Device() = default;

  virtual void deliver(const TimedStimulus& stimulus, Engine& engine) = 0;
  virtual void on_power(PowerState /*state*/, Engine& /*engine*/) {}
  /// Called after every processed queue entry, in registration order.
  virtual void settle(Engine& /*engine*/) {}
};

/// Broadcasts power transitions to every other registered device.
class PowerRail : public Device {
 public:
  void deliver(const TimedStimulus& stimulus, Engine& engine) override;

  bool on() const noexcept { return on_; }

 private:
  bool on_ = false;
};

class Engine {
 public:
  using TimerFn = std::function<void(Engine&)>;
  using StepObserver = std::function<void(const Engine&)>;

  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  template <class D, class... Args>
  D& add_device(std::string id, Args&&... args) {
    auto device = std::make_unique<D>(std::forward<Args>(args)...);
    D& ref = *device;
    register_device(std::move(id), std::move(device));
    return ref;
  }

  void schedule(TimedStimulus stimulus);
  void schedule_timer(SimTime at, TimerFn fn);

  std::vector<SimEvent> run_until(SimTime end);

  /// Appends an event stamped with the current clock.
  void emit(std::string source, std::string kind, std::string detail = {});

  void set_line(const std::string& name, LogicLevel level);
  LogicLevel line(const std::string& name) const;

  void add_observer(StepObserver observer) { observers_.push_back(std::move(observer)); }

  bool has_device(std::string_view id) const;
  Device& device(std::string_view id);
  std::vector<std::pair<std::string, Device*>> devices() const;

  SimTime now() const noexcept { return clock_; }
  std::size_t pending() const noexcept { return queue_.size(); }
  const std::vector<SimEvent>& log() const noexcept { return log_; }

 private:
  struct Timer {
    TimerFn fn;
  };
  using Entry = std::variant<TimedStimulus, Timer>;
  using Key = std::pair<SimTime, std::uint64_t>;

  void register_device(std::string id, std::unique_ptr<Device> device);
  void push(SimTime at, Entry entry);

  SimTime clock_ = 0;
  std::uint64_t next_seq_ = 0;
  std::map<Key, Entry> queue_;
  std::vector<std::pair<std::string, std::unique_ptr<Device>>> devices_;
  std::map<std::string, LogicLevel, std::less<>> lines_;
  std::vector<SimEvent> log_;
  std::vector<StepObserver> observers_;
};

}  // namespace layersim
