#include "layersim/core.hpp"

#include <algorithm>

namespace layersim {

std::string_view to_string(LogicLevel level) noexcept { return level == LogicLevel::High ? "HIGH" : "LOW"; }

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ScheduleInPast: return "SCHEDULE_IN_PAST";
    case ErrorCode::UnknownDevice: return "UNKNOWN_DEVICE";
    case ErrorCode::UnorderedSamples: return "UNORDERED_SAMPLES";
    case ErrorCode::InvalidEvent: return "INVALID_EVENT";
    case ErrorCode::PowerOff: return "POWER_OFF";
    case ErrorCode::Unpowered: return "UNPOWERED";
    case ErrorCode::MalformedPin: return "MALFORMED_PIN";
    case ErrorCode::PersistFail: return "PERSIST_FAIL";
    case ErrorCode::NegativeLoad: return "NEGATIVE_LOAD";
    case ErrorCode::BadWireIndex: return "BAD_WIRE_INDEX";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::StoreIo: return "STORE_IO";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

SimError::SimError(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

bool clean_field(std::string_view field) {
  return field.find_first_of("\t\n\r") == std::string_view::npos;
}

}  // namespace

SimEvent::SimEvent(SimTime at, std::string source, std::string kind, std::string detail)
    : at_(at), source_(std::move(source)), kind_(std::move(kind)), detail_(std::move(detail)) {
  if (source_.empty() || kind_.empty()) {
    throw SimError(ErrorCode::InvalidEvent, "event source and kind must be non-empty");
  }
  if (!clean_field(source_) || !clean_field(kind_) || !clean_field(detail_)) {
    throw SimError(ErrorCode::InvalidEvent, "event fields must not contain tabs or line breaks");
  }
}

// ---------------------------------------------------------------------------

DebounceFilter::DebounceFilter(DebounceConfig cfg, LogicLevel initial)
    : cfg_(cfg), accepted_(initial), raw_(initial) {
  if (cfg_.stable_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "debounce stable_ms must be >= 1");
}

std::optional<SimTime> DebounceFilter::deadline() const {
  if (raw_ == accepted_) return std::nullopt;
  return raw_since_ + cfg_.stable_ms;
}

std::optional<Sample> DebounceFilter::poll(SimTime now) {
  auto due = deadline();
  if (!due || now < *due) return std::nullopt;
  accepted_ = raw_;
  return Sample{*due, accepted_};
}

std::optional<Sample> DebounceFilter::feed(SimTime at, LogicLevel level) {
  auto edge = poll(at);
  if (level != raw_) {
    raw_ = level;
    raw_since_ = at;
  }
  return edge;
}

std::vector<Sample> debounce(std::span<const Sample> samples, DebounceConfig cfg) {
  std::vector<Sample> edges;
  if (samples.empty()) return edges;
  DebounceFilter filter(cfg, samples.front().level);
  SimTime last = samples.front().at;
  for (const auto& s : samples) {
    if (s.at < last) throw SimError(ErrorCode::UnorderedSamples, "sample timestamps must be non-decreasing");
    last = s.at;
    if (auto edge = filter.feed(s.at, s.level)) edges.push_back(*edge);
  }
  if (auto edge = filter.poll(kForever)) edges.push_back(*edge);
  return edges;
}

// ---------------------------------------------------------------------------

void PowerRail::deliver(const TimedStimulus& stimulus, Engine& engine) {
  const auto* action = std::get_if<PowerAction>(&stimulus.action);
  if (action == nullptr) return;
  on_ = action->state == PowerState::On;
  engine.set_line("power", to_level(on_));
  for (auto& [id, device] : engine.devices()) {
    if (device != this) device->on_power(action->state, engine);
  }
}

void Engine::register_device(std::string id, std::unique_ptr<Device> device) {
  if (has_device(id)) throw SimError(ErrorCode::UnknownDevice, "device registered twice: " + id);
  devices_.emplace_back(std::move(id), std::move(device));
}

bool Engine::has_device(std::string_view id) const {
  return std::any_of(devices_.begin(), devices_.end(), [&](const auto& d) { return d.first == id; });
}

Device& Engine::device(std::string_view id) {
  for (auto& [name, dev] : devices_) {
    if (name == id) return *dev;
  }
  throw SimError(ErrorCode::UnknownDevice, "no device named '" + std::string(id) + "'");
}

std::vector<std::pair<std::string, Device*>> Engine::devices() const {
  std::vector<std::pair<std::string, Device*>> out;
  out.reserve(devices_.size());
  for (const auto& [name, dev] : devices_) out.emplace_back(name, dev.get());
  return out;
}

void Engine::push(SimTime at, Entry entry) {
  if (at < clock_) {
    throw SimError(ErrorCode::ScheduleInPast,
                   "entry at " + std::to_string(at) + " ms is before clock " + std::to_string(clock_) + " ms");
  }
  queue_.emplace(Key{at, next_seq_++}, std::move(entry));
}

void Engine::schedule(TimedStimulus stimulus) {
  if (!has_device(stimulus.target)) {
    throw SimError(ErrorCode::UnknownDevice, "no device named '" + stimulus.target + "'");
  }
  const SimTime at = stimulus.at;
  push(at, std::move(stimulus));
}

void Engine::schedule_timer(SimTime at, TimerFn fn) { push(at, Timer{std::move(fn)}); }

std::vector<SimEvent> Engine::run_until(SimTime end) {
  const std::size_t first = log_.size();
  while (!queue_.empty() && queue_.begin()->first.first <= end) {
    auto node = queue_.extract(queue_.begin());
    clock_ = node.key().first;
    if (auto* stimulus = std::get_if<TimedStimulus>(&node.mapped())) {
      emit(stimulus->target, "STIMULUS", format_action(stimulus->action));
      device(stimulus->target).deliver(*stimulus, *this);
    } else {
      std::get<Timer>(node.mapped()).fn(*this);
    }
    for (auto& [id, dev] : devices_) dev->settle(*this);
    for (const auto& observer : observers_) observer(*this);
  }
  clock_ = std::max(clock_, end);
  return {log_.begin() + static_cast<std::ptrdiff_t>(first), log_.end()};
}

void Engine::emit(std::string source, std::string kind, std::string detail) {
  log_.emplace_back(clock_, std::move(source), std::move(kind), std::move(detail));
}

void Engine::set_line(const std::string& name, LogicLevel level) { lines_[name] = level; }

LogicLevel Engine::line(const std::string& name) const {
  auto it = lines_.find(name);
  return it == lines_.end() ? LogicLevel::Low : it->second;
}

}  // namespace layersim
