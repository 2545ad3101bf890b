#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace layersim {

enum class PowerState : std::uint8_t { On, Off };

enum class Key : std::uint8_t {
  D0, D1, D2, D3, D4, D5, D6, D7, D8, D9,
  Open,
  Cancel,
  ChangePass,
  Reset,
  Default,
};

inline constexpr int kKeyCount = 15;

enum class KeypadSide : std::uint8_t { Inside, Outside };

enum class WireCondition : std::uint8_t { Intact, Open };

constexpr bool is_digit(Key key) noexcept { return key <= Key::D9; }
constexpr char digit_char(Key key) noexcept { return static_cast<char>('0' + static_cast<int>(key)); }
constexpr Key digit_key(int d) noexcept { return static_cast<Key>(d); }

/// Scenario token for a key: "0".."9", OPEN, CANCEL, CHANGE, RESET, DEFAULT.
std::string_view key_token(Key key) noexcept;
std::optional<Key> parse_key_token(std::string_view token) noexcept;

std::string_view to_string(KeypadSide side) noexcept;
std::string_view to_string(PowerState state) noexcept;
std::string_view to_string(WireCondition condition) noexcept;

struct PowerAction {
  PowerState state = PowerState::On;
  bool operator==(const PowerAction&) const = default;
};

/// One logical key press. `bounce_edges` raw contact edges are generated
/// `bounce_gap_ms` apart before the contact settles closed.
struct KeyPress {
  KeypadSide side = KeypadSide::Outside;
  Key key = Key::D0;
  std::uint32_t bounce_edges = 1;
  std::uint64_t bounce_gap_ms = 0;
  bool operator==(const KeyPress&) const = default;
};

struct DetectorScan {
  double mass_g = 0.0;
  double distance_cm = 0.0;
  bool operator==(const DetectorScan&) const = default;
};

struct MatLoad {
  double kg = 0.0;
  bool operator==(const MatLoad&) const = default;
};

struct MatUnload {
  bool operator==(const MatUnload&) const = default;
};

struct MatWire {
  int wire = 1;
  WireCondition condition = WireCondition::Intact;
  bool operator==(const MatWire&) const = default;
};

struct AlarmReset {
  bool operator==(const AlarmReset&) const = default;
};

using Action = std::variant<PowerAction, KeyPress, DetectorScan, MatLoad, MatUnload, MatWire, AlarmReset>;

namespace device_id {
inline constexpr std::string_view kPower = "power";
inline constexpr std::string_view kDetector = "detector";
inline constexpr std::string_view kAccess = "access-controller";
inline constexpr std::string_view kMat = "mat";
inline constexpr std::string_view kAlarm = "alarm";
}  // namespace device_id

/// The device an action is addressed to.
std::string_view target_of(const Action& action) noexcept;

/// Renders an action the way it appears after `at <ms> ` in a scenario,
/// e.g. "keypad inside press 4 bounce 3 2".
std::string format_action(const Action& action);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace layersim
