#include "layersim/access.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <system_error>

namespace layersim {

namespace {

const std::string kSource(device_id::kAccess);

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Credentials

std::optional<Pin> Pin::parse(std::string_view digits) {
  if (digits.size() < kMinPinDigits || digits.size() > kMaxPinDigits || !all_digits(digits)) return std::nullopt;
  return Pin(std::string(digits));
}

Pin Pin::from(std::string_view digits) {
  auto pin = parse(digits);
  if (!pin) throw SimError(ErrorCode::MalformedPin, "PIN must be 4-6 decimal digits");
  return *pin;
}

std::string serialize_credentials(const Credentials& creds) {
  return "admin=" + creds.admin.digits() + "\nuser=" + creds.user.digits() + "\n";
}

Credentials parse_credentials(std::string_view text) {
  if (text.size() > kEepromBytes) throw SimError(ErrorCode::StoreIo, "credential store exceeds 128 bytes");
  std::optional<Pin> admin;
  std::optional<Pin> user;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw SimError(ErrorCode::StoreIo, "credential store line lacks '='");
    auto key = line.substr(0, eq);
    auto pin = Pin::parse(line.substr(eq + 1));
    if (!pin) throw SimError(ErrorCode::StoreIo, "credential store holds a malformed PIN");
    if (key == "admin") {
      admin = pin;
    } else if (key == "user") {
      user = pin;
    } else {
      throw SimError(ErrorCode::StoreIo, "unknown credential store key '" + std::string(key) + "'");
    }
  }
  if (!admin || !user) throw SimError(ErrorCode::StoreIo, "credential store must hold admin and user PINs");
  return {*admin, *user};
}

void MemoryCredentialStorage::write(const std::string& bytes) {
  if (fail_next_) {
    fail_next_ = false;
    throw SimError(ErrorCode::PersistFail, "simulated EEPROM write failure");
  }
  if (bytes.size() > kEepromBytes) throw SimError(ErrorCode::PersistFail, "credential store exceeds 128 bytes");
  bytes_ = bytes;
}

std::optional<std::string> FileCredentialStorage::read() {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return std::nullopt;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw SimError(ErrorCode::StoreIo, "cannot open credential store " + path_.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw SimError(ErrorCode::StoreIo, "cannot read credential store " + path_.string());
  return buf.str();
}

void FileCredentialStorage::write(const std::string& bytes) {
  if (bytes.size() > kEepromBytes) throw SimError(ErrorCode::PersistFail, "credential store exceeds 128 bytes");
  auto tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SimError(ErrorCode::PersistFail, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw SimError(ErrorCode::PersistFail, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw SimError(ErrorCode::PersistFail, "cannot replace " + path_.string());
  }
}

// ---------------------------------------------------------------------------
// Controller

void AccessPolicy::validate() const {
  if (denial_limit < 1) throw SimError(ErrorCode::ConfigInvalid, "denial_limit must be >= 1");
  if (grant_window_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "grant_window_ms must be >= 1");
  if (change_timeout_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "change_timeout_ms must be >= 1");
  if (!Pin::parse(factory_admin_pin)) throw SimError(ErrorCode::ConfigInvalid, "factory_admin_pin must be 4-6 digits");
  if (!Pin::parse(factory_user_pin)) throw SimError(ErrorCode::ConfigInvalid, "factory_user_pin must be 4-6 digits");
}

std::string_view to_string(ControllerMode mode) noexcept {
  switch (mode) {
    case ControllerMode::Unpowered: return "UNPOWERED";
    case ControllerMode::Idle: return "IDLE";
    case ControllerMode::Entering: return "ENTERING";
    case ControllerMode::Granted: return "GRANTED";
    case ControllerMode::ChangeAwaitOld: return "CHANGE_AWAIT_OLD";
    case ControllerMode::ChangeAwaitNew: return "CHANGE_AWAIT_NEW";
  }
  return "UNKNOWN";
}

std::string_view to_string(ChangeResult result) noexcept {
  switch (result) {
    case ChangeResult::Ok: return "OK";
    case ChangeResult::Rejected: return "REJECTED";
    case ChangeResult::MalformedPin: return "MALFORMED_PIN";
    case ChangeResult::PersistFail: return "PERSIST_FAIL";
  }
  return "UNKNOWN";
}

AccessController::AccessController(AccessPolicy policy, std::unique_ptr<CredentialStorage> storage)
    : policy_((policy.validate(), std::move(policy))),
      factory_admin_(Pin::from(policy_.factory_admin_pin)),
      factory_user_(Pin::from(policy_.factory_user_pin)),
      storage_(std::move(storage)) {
  if (!storage_) storage_ = std::make_unique<MemoryCredentialStorage>();
}

void AccessController::require_power() const {
  if (state_.mode == ControllerMode::Unpowered) throw SimError(ErrorCode::Unpowered, "access controller is unpowered");
}

void AccessController::emit(SimTime at, std::string kind, std::string detail) {
  outbox_.emplace_back(at, kSource, std::move(kind), std::move(detail));
}

std::vector<SimEvent> AccessController::take_events() { return std::exchange(outbox_, {}); }

void AccessController::to_idle() {
  state_.mode = ControllerMode::Idle;
  state_.entry_buffer.clear();
  pending_old_.clear();
  change_deadline_.reset();
}

std::vector<SimEvent> AccessController::on_power(PowerState state, SimTime at) {
  last_seen_ = at;
  if (state == PowerState::Off) {
    state_ = ControllerState{};
    lock_ = MagLock{};
    creds_.reset();
    compare_register_.reset();
    pending_old_.clear();
    change_deadline_.reset();
    emit(at, "POWER_OFF", "maglock=UNLOCKED");
    return take_events();
  }
  auto stored = storage_->read();
  creds_ = stored ? parse_credentials(*stored) : Credentials{factory_admin_, factory_user_};
  state_ = ControllerState{};
  state_.mode = ControllerMode::Idle;
  lock_ = MagLock{.engaged = true, .powered = true};
  emit(at, "POWER_ON", std::string("pins=") + (stored ? "stored" : "factory") + " maglock=LOCKED");
  return take_events();
}

std::vector<SimEvent> AccessController::tick(SimTime now) {
  expire_due(now);
  return take_events();
}

void AccessController::expire_due(SimTime now) {
  last_seen_ = std::max(last_seen_, now);
  if (state_.mode == ControllerMode::Unpowered) return;
  if (state_.grant_expires_at && now >= *state_.grant_expires_at) {
    state_.grant_expires_at.reset();
    state_.mode = ControllerMode::Idle;
    lock_.engaged = true;
    emit(now, "GRANT_EXPIRED", "maglock=LOCKED");
  }
  if (change_deadline_ && now >= *change_deadline_) {
    to_idle();
    emit(now, "CHANGE_TIMEOUT");
  }
}

std::optional<SimTime> AccessController::next_deadline() const {
  std::optional<SimTime> next = state_.grant_expires_at;
  if (change_deadline_ && (!next || *change_deadline_ < *next)) next = change_deadline_;
  return next;
}

bool AccessController::grant_open(SimTime now) const {
  return state_.mode == ControllerMode::Granted && state_.grant_expires_at && now < *state_.grant_expires_at;
}

LockState AccessController::maglock_state(SimTime now) const {
  if (!lock_.powered) return LockState::Unlocked;
  if (state_.grant_expires_at) return now < *state_.grant_expires_at ? LockState::Unlocked : LockState::Locked;
  return lock_.engaged ? LockState::Locked : LockState::Unlocked;
}

Verification AccessController::verify_pin(std::string_view entered, SimTime at) {
  require_power();
  expire_due(at);

  Verification result;
  std::string role;
  if (!Pin::parse(entered)) {
    result.malformed = true;
  } else {
    // Each stored PIN is loaded into the compare register in turn; the
    // store itself is only read.
    for (const auto& [name, stored] : {std::pair{"admin", &creds_->admin}, std::pair{"user", &creds_->user}}) {
      compare_register_ = *stored;
      const auto& reg = compare_register_->digits();
      bool match = reg.size() == entered.size();
      for (std::size_t i = 0; match && i < reg.size(); ++i) match = reg[i] == entered[i];
      if (match) {
        result.verdict = Verdict::Granted;
        role = name;
        break;
      }
    }
  }

  if (result.verdict == Verdict::Granted) {
    state_.consecutive_denials = 0;
    if (is_high(state_.alarm_line)) {
      state_.alarm_line = LogicLevel::Low;
      emit(at, "ALARM_LINE", "LOW");
    }
    state_.mode = ControllerMode::Granted;
    state_.grant_expires_at = at + policy_.grant_window_ms;
    lock_.engaged = false;
    emit(at, "GRANTED", "role=" + role);
    emit(at, "RELAY", "maglock=UNLOCKED until=" + std::to_string(*state_.grant_expires_at));
  } else {
    ++state_.consecutive_denials;
    emit(at, "DENIED",
         "count=" + std::to_string(state_.consecutive_denials) + (result.malformed ? " malformed" : ""));
    if (state_.consecutive_denials >= policy_.denial_limit && !is_high(state_.alarm_line)) {
      state_.alarm_line = LogicLevel::High;
      emit(at, "ALARM_LINE", "HIGH");
    }
  }
  return result;
}

bool AccessController::persist(const Credentials& next, SimTime at) {
  try {
    storage_->write(serialize_credentials(next));
  } catch (const SimError& err) {
    emit(at, "PERSIST_FAIL", std::string(to_string(err.code())));
    return false;
  }
  creds_ = next;
  return true;
}

ChangeResult AccessController::change_pin(std::string_view old_pin, std::string_view new_pin) {
  require_power();
  auto fresh = Pin::parse(new_pin);
  if (!fresh) return ChangeResult::MalformedPin;
  Credentials next = *creds_;
  bool matched = false;
  if (old_pin == creds_->user.digits()) {
    next.user = *fresh;
    matched = true;
  }
  if (old_pin == creds_->admin.digits()) {
    next.admin = *fresh;
    matched = true;
  }
  if (!matched) return ChangeResult::Rejected;
  return persist(next, last_seen_) ? ChangeResult::Ok : ChangeResult::PersistFail;
}

void AccessController::handle_admin_command(Key key, KeypadSide side, SimTime at) {
  const std::string name(key_token(key));
  if (side == KeypadSide::Outside) {
    emit(at, "REJECTED_SIDE", name);
    return;
  }
  if (state_.entry_buffer == creds_->admin.digits()) {
    Credentials next = key == Key::Default ? Credentials{factory_admin_, factory_user_}
                                           : Credentials{creds_->admin, factory_user_};
    if (persist(next, at)) emit(at, name + "_OK");
  } else {
    emit(at, "AUTH_REJECTED", name);
  }
  to_idle();
}

std::vector<SimEvent> AccessController::on_key(Key key, KeypadSide side, SimTime at) {
  require_power();
  expire_due(at);
  last_seen_ = at;

  const std::string where(to_string(side));
  if (state_.mode == ControllerMode::Granted) {
    emit(at, "KEY_IGNORED", where + " " + std::string(key_token(key)) + " granted");
    return take_events();
  }
  if (change_deadline_) change_deadline_ = at + policy_.change_timeout_ms;

  if (is_digit(key)) {
    if (state_.mode == ControllerMode::Idle) state_.mode = ControllerMode::Entering;
    if (state_.entry_buffer.size() < kMaxPinDigits) {
      state_.entry_buffer.push_back(digit_char(key));
      emit(at, "KEY", where + " *");
    } else {
      emit(at, "KEY_IGNORED", where + " * buffer_full");
    }
    return take_events();
  }

  switch (key) {
    case Key::Cancel:
      to_idle();
      emit(at, "CANCEL", where);
      break;
    case Key::Open:
      if (state_.mode == ControllerMode::ChangeAwaitOld) {
        pending_old_ = std::exchange(state_.entry_buffer, {});
        state_.mode = ControllerMode::ChangeAwaitNew;
        emit(at, "CHANGE_STEP", "await_new");
      } else if (state_.mode == ControllerMode::ChangeAwaitNew) {
        auto result = change_pin(pending_old_, state_.entry_buffer);
        emit(at, "CHANGE_" + std::string(to_string(result)));
        to_idle();
      } else {
        std::string entered = std::exchange(state_.entry_buffer, {});
        state_.mode = ControllerMode::Idle;
        verify_pin(entered, at);
      }
      break;
    case Key::ChangePass:
      state_.mode = ControllerMode::ChangeAwaitOld;
      state_.entry_buffer.clear();
      pending_old_.clear();
      change_deadline_ = at + policy_.change_timeout_ms;
      emit(at, "CHANGE_STEP", "await_old");
      break;
    case Key::Reset:
    case Key::Default:
      handle_admin_command(key, side, at);
      break;
    default:
      break;
  }
  return take_events();
}

// ---------------------------------------------------------------------------
// Engine adapter

std::vector<Sample> expand_press(const KeyPress& press, SimTime at, SimTime hold_ms) {
  const std::uint32_t edges = std::max<std::uint32_t>(press.bounce_edges, 1);
  std::vector<Sample> samples;
  samples.reserve(edges + 1);
  for (std::uint32_t i = 0; i < edges; ++i) {
    samples.push_back({at + i * press.bounce_gap_ms, to_level(i % 2 == 0)});
  }
  samples.back().level = LogicLevel::High;
  samples.push_back({samples.back().at + hold_ms, LogicLevel::Low});
  return samples;
}

AccessControllerDevice::AccessControllerDevice(AccessPolicy policy, std::unique_ptr<CredentialStorage> storage,
                                               DebounceConfig debounce, SimTime key_hold_ms)
    : controller_(std::move(policy), std::move(storage)), debounce_(debounce), key_hold_ms_(key_hold_ms) {
  if (debounce_.stable_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "stable_ms must be >= 1");
}

AccessControllerDevice::Channel& AccessControllerDevice::channel(KeypadSide side, Key key) {
  auto it = channels_.find({side, key});
  if (it == channels_.end()) it = channels_.emplace(std::pair{side, key}, Channel{DebounceFilter(debounce_)}).first;
  return it->second;
}

void AccessControllerDevice::on_power(PowerState state, Engine& engine) {
  ++epoch_;
  channels_.clear();
  armed_deadline_.reset();
  flush(controller_.on_power(state, engine.now()), engine);
}

void AccessControllerDevice::deliver(const TimedStimulus& stimulus, Engine& engine) {
  const auto* press = std::get_if<KeyPress>(&stimulus.action);
  if (press == nullptr) return;
  if (controller_.state().mode == ControllerMode::Unpowered) {
    engine.emit(kSource, "IGNORED", "unpowered");
    return;
  }
  auto samples = expand_press(*press, engine.now(), key_hold_ms_);
  raw_edge(press->side, press->key, samples.front(), engine);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    engine.schedule_timer(samples[i].at,
                          [this, side = press->side, key = press->key, s = samples[i], epoch = epoch_](Engine& e) {
                            if (epoch == epoch_) raw_edge(side, key, s, e);
                          });
  }
}

void AccessControllerDevice::raw_edge(KeypadSide side, Key key, Sample sample, Engine& engine) {
  auto& ch = channel(side, key);
  if (auto edge = ch.filter.feed(sample.at, sample.level)) accept(side, key, *edge, engine);
  if (auto due = ch.filter.deadline()) {
    engine.schedule_timer(*due, [this, side, key, epoch = epoch_](Engine& e) { check_channel(side, key, epoch, e); });
  }
}

void AccessControllerDevice::check_channel(KeypadSide side, Key key, std::uint64_t epoch, Engine& engine) {
  if (epoch != epoch_) return;
  if (auto edge = channel(side, key).filter.poll(engine.now())) accept(side, key, *edge, engine);
}

void AccessControllerDevice::accept(KeypadSide side, Key key, Sample edge, Engine& engine) {
  if (!is_high(edge.level)) return;
  flush(controller_.on_key(key, side, engine.now()), engine);
}

void AccessControllerDevice::flush(std::vector<SimEvent> events, Engine& engine) {
  for (auto& e : events) engine.emit(e.source(), e.kind(), e.detail());
  const SimTime now = engine.now();
  engine.set_line("access.alarm", controller_.state().alarm_line);
  engine.set_line("access.grant", to_level(controller_.grant_open(now)));
  auto due = controller_.next_deadline();
  if (due && due != armed_deadline_ && *due >= now) {
    armed_deadline_ = due;
    engine.schedule_timer(*due, [this, epoch = epoch_](Engine& e) {
      if (epoch != epoch_) return;
      armed_deadline_.reset();
      flush(controller_.tick(e.now()), e);
    });
  }
}

}  // namespace layersim
