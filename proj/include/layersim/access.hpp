#pragma once

// Keypad access controller: PIN entry state machine, dual-memory PIN
// verification, admin/user credentials kept in a small persistent store,
// relay-driven mag-lock and an alarm output line.

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layersim/core.hpp"

namespace layersim {

inline constexpr std::size_t kMinPinDigits = 4;
inline constexpr std::size_t kMaxPinDigits = 6;
inline constexpr std::size_t kEepromBytes = 128;

/// 4 to 6 decimal digits.
class Pin {
 public:
  static std::optional<Pin> parse(std::string_view digits);
  /// Throws SimError(MalformedPin).
  static Pin from(std::string_view digits);

  const std::string& digits() const noexcept { return digits_; }
  bool operator==(const Pin&) const = default;

 private:
  explicit Pin(std::string digits) : digits_(std::move(digits)) {}
  std::string digits_;
};

struct Credentials {
  Pin admin;
  Pin user;
  bool operator==(const Credentials&) const = default;
};

/// "admin=<digits>\nuser=<digits>\n"
std::string serialize_credentials(const Credentials& creds);
/// Throws SimError(StoreIo) on malformed content.
Credentials parse_credentials(std::string_view text);

/// Non-volatile backing for the credential store (the EEPROM).
class CredentialStorage {
 public:
  virtual ~CredentialStorage() = default;
  /// Returns the stored bytes, or nullopt when nothing was ever stored.
  virtual std::optional<std::string> read() = 0;
  /// Replaces the stored bytes atomically. Throws SimError on failure,
  /// leaving the previous contents intact.
  virtual void write(const std::string& bytes) = 0;
};

class MemoryCredentialStorage : public CredentialStorage {
 public:
  std::optional<std::string> read() override { return bytes_; }
  void write(const std::string& bytes) override;

  /// Makes the next write fail with PERSIST_FAIL.
  void fail_next_write() noexcept { fail_next_ = true; }

 private:
  std::optional<std::string> bytes_;
  bool fail_next_ = false;
};

/// Write-to-temporary then rename.
class FileCredentialStorage : public CredentialStorage {
 public:
  explicit FileCredentialStorage(std::filesystem::path path) : path_(std::move(path)) {}

  std::optional<std::string> read() override;
  void write(const std::string& bytes) override;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct AccessPolicy {
  int denial_limit = 3;
  SimTime grant_window_ms = 5000;
  SimTime change_timeout_ms = 30000;
  double supply_volts = 5.0;
  std::string factory_admin_pin = "002200";
  std::string factory_user_pin = "1234";

  void validate() const;
};

enum class ControllerMode { Unpowered, Idle, Entering, Granted, ChangeAwaitOld, ChangeAwaitNew };

std::string_view to_string(ControllerMode mode) noexcept;

struct ControllerState {
  ControllerMode mode = ControllerMode::Unpowered;
  std::string entry_buffer;
  int consecutive_denials = 0;
  std::optional<SimTime> grant_expires_at;
  LogicLevel alarm_line = LogicLevel::Low;
};

struct MagLock {
  bool engaged = false;
  bool powered = false;
};

enum class LockState { Locked, Unlocked };

enum class Verdict { Granted, Denied };

struct Verification {
  Verdict verdict = Verdict::Denied;
  bool malformed = false;
};

enum class ChangeResult { Ok, Rejected, MalformedPin, PersistFail };

std::string_view to_string(ChangeResult result) noexcept;

class AccessController {
 public:
  AccessController(AccessPolicy policy, std::unique_ptr<CredentialStorage> storage);

  /// Throws SimError(Unpowered) when the rail is off.
  std::vector<SimEvent> on_key(Key key, KeypadSide side, SimTime at);
  std::vector<SimEvent> on_power(PowerState state, SimTime at);
  /// Expires the grant window and the change-flow timeout when due.
  std::vector<SimEvent> tick(SimTime now);

  /// Compares `entered` against a snapshot of the stored PINs. A malformed
  /// entry is a denial. Events are queued; see take_events().
  Verification verify_pin(std::string_view entered, SimTime at);
  ChangeResult change_pin(std::string_view old_pin, std::string_view new_pin);

  LockState maglock_state(SimTime now) const;
  LockState maglock_state() const { return maglock_state(last_seen_); }

  /// Earliest time tick() has work to do.
  std::optional<SimTime> next_deadline() const;
  bool grant_open(SimTime now) const;

  std::vector<SimEvent> take_events();

  const ControllerState& state() const noexcept { return state_; }
  const MagLock& maglock() const noexcept { return lock_; }
  const AccessPolicy& policy() const noexcept { return policy_; }
  /// RAM copy of the credentials; empty while unpowered.
  const std::optional<Credentials>& credentials() const noexcept { return creds_; }
  CredentialStorage& storage() noexcept { return *storage_; }

 private:
  void require_power() const;
  void expire_due(SimTime now);
  void emit(SimTime at, std::string kind, std::string detail = {});
  bool persist(const Credentials& next, SimTime at);
  void to_idle();
  void handle_admin_command(Key key, KeypadSide side, SimTime at);

  AccessPolicy policy_;
  Pin factory_admin_;
  Pin factory_user_;
  std::unique_ptr<CredentialStorage> storage_;
  std::optional<Credentials> creds_;
  std::optional<Pin> compare_register_;
  ControllerState state_;
  MagLock lock_;
  std::string pending_old_;
  std::optional<SimTime> change_deadline_;
  SimTime last_seen_ = 0;
  std::vector<SimEvent> outbox_;
};

/// Raw contact samples for one logical press: `bounce_edges` alternating
/// edges starting HIGH, the last one forced HIGH, then released LOW
/// `hold_ms` after the last edge.
std::vector<Sample> expand_press(const KeyPress& press, SimTime at, SimTime hold_ms);

/// Engine adapter: debounces every (side, key) contact, feeds accepted
/// presses to the controller and publishes `access.alarm` / `access.grant`.
class AccessControllerDevice : public Device {
 public:
  AccessControllerDevice(AccessPolicy policy, std::unique_ptr<CredentialStorage> storage, DebounceConfig debounce,
                         SimTime key_hold_ms);

  void deliver(const TimedStimulus& stimulus, Engine& engine) override;
  void on_power(PowerState state, Engine& engine) override;

  AccessController& controller() noexcept { return controller_; }
  const AccessController& controller() const noexcept { return controller_; }

 private:
  struct Channel {
    DebounceFilter filter;
  };

  void raw_edge(KeypadSide side, Key key, Sample sample, Engine& engine);
  void check_channel(KeypadSide side, Key key, std::uint64_t epoch, Engine& engine);
  void accept(KeypadSide side, Key key, Sample edge, Engine& engine);
  void flush(std::vector<SimEvent> events, Engine& engine);
  Channel& channel(KeypadSide side, Key key);

  AccessController controller_;
  DebounceConfig debounce_;
  SimTime key_hold_ms_;
  std::map<std::pair<KeypadSide, Key>, Channel> channels_;
  std::uint64_t epoch_ = 0;
  std::optional<SimTime> armed_deadline_;
};

}  // namespace layersim
