#include "layersim/stimulus.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace layersim {

namespace {

constexpr std::array<std::string_view, kKeyCount> kKeyTokens = {
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "OPEN", "CANCEL", "CHANGE", "RESET", "DEFAULT",
};

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string_view key_token(Key key) noexcept { return kKeyTokens[static_cast<std::size_t>(key)]; }

std::optional<Key> parse_key_token(std::string_view token) noexcept {
  for (std::size_t i = 0; i < kKeyTokens.size(); ++i) {
    if (kKeyTokens[i] == token) return static_cast<Key>(i);
  }
  return std::nullopt;
}

std::string_view to_string(KeypadSide side) noexcept {
  return side == KeypadSide::Inside ? "inside" : "outside";
}

std::string_view to_string(PowerState state) noexcept { return state == PowerState::On ? "on" : "off"; }

std::string_view to_string(WireCondition condition) noexcept {
  return condition == WireCondition::Intact ? "intact" : "open";
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::logic_error("format_real: to_chars failed");
  return std::string(buf.data(), end);
}

std::string_view target_of(const Action& action) noexcept {
  return std::visit(Overloaded{
                        [](const PowerAction&) { return device_id::kPower; },
                        [](const KeyPress&) { return device_id::kAccess; },
                        [](const DetectorScan&) { return device_id::kDetector; },
                        [](const MatLoad&) { return device_id::kMat; },
                        [](const MatUnload&) { return device_id::kMat; },
                        [](const MatWire&) { return device_id::kMat; },
                        [](const AlarmReset&) { return device_id::kAlarm; },
                    },
                    action);
}

std::string format_action(const Action& action) {
  return std::visit(
      Overloaded{
          [](const PowerAction& a) { return "power " + std::string(to_string(a.state)); },
          [](const KeyPress& a) {
            std::string out = "keypad " + std::string(to_string(a.side)) + " press " + std::string(key_token(a.key));
            if (a.bounce_edges != 1 || a.bounce_gap_ms != 0) {
              out += " bounce " + std::to_string(a.bounce_edges) + " " + std::to_string(a.bounce_gap_ms);
            }
            return out;
          },
          [](const DetectorScan& a) {
            return "detector target mass=" + format_real(a.mass_g) + " distance=" + format_real(a.distance_cm);
          },
          [](const MatLoad& a) { return "mat load " + format_real(a.kg); },
          [](const MatUnload&) { return std::string("mat unload"); },
          [](const MatWire& a) {
            return "mat wire " + std::to_string(a.wire) + " " + std::string(to_string(a.condition));
          },
          [](const AlarmReset&) { return std::string("alarm reset"); },
      },
      action);
}

}  // namespace layersim
