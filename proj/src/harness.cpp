#include "layersim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace layersim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      if (pos < text.size()) lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

template <class T>
std::optional<T> parse_uint(std::string_view s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_nonneg_real(std::string_view s) {
  if (s.empty() || s.front() == '+' || s.front() == '-') return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value) || value < 0.0) return std::nullopt;
  return value;
}

std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool valid_name(std::string_view name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

// ---------------------------------------------------------------------------
// Config keys

struct ConfigKey {
  std::string_view name;
  std::function<bool(HarnessConfig&, std::string_view)> set;
  std::function<std::string(const HarnessConfig&)> get;
};

template <class T>
ConfigKey uint_key(std::string_view name, T HarnessConfig::*outer, SimTime T::*field) {
  return {name,
          [=](HarnessConfig& c, std::string_view v) {
            auto n = parse_uint<SimTime>(v);
            if (n) (c.*outer).*field = *n;
            return n.has_value();
          },
          [=](const HarnessConfig& c) { return std::to_string((c.*outer).*field); }};
}

template <class T>
ConfigKey real_key(std::string_view name, T HarnessConfig::*outer, double T::*field) {
  return {name,
          [=](HarnessConfig& c, std::string_view v) {
            auto n = parse_real(v);
            if (n) (c.*outer).*field = *n;
            return n.has_value();
          },
          [=](const HarnessConfig& c) { return format_real((c.*outer).*field); }};
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back(real_key("sensitivity_threshold", &HarnessConfig::detector, &DetectorConfig::sensitivity_threshold));
    k.push_back(real_key("coupling_k", &HarnessConfig::detector, &DetectorConfig::coupling_k));
    k.push_back(real_key("min_distance_cm", &HarnessConfig::detector, &DetectorConfig::min_distance_cm));
    k.push_back(real_key("detector_supply_volts", &HarnessConfig::detector, &DetectorConfig::supply_volts));
    k.push_back(real_key("alarm_watts", &HarnessConfig::detector, &DetectorConfig::alarm_watts));
    k.push_back({"denial_limit",
                 [](HarnessConfig& c, std::string_view v) {
                   auto n = parse_uint<int>(v);
                   if (n) c.access.denial_limit = *n;
                   return n.has_value();
                 },
                 [](const HarnessConfig& c) { return std::to_string(c.access.denial_limit); }});
    k.push_back(uint_key("grant_window_ms", &HarnessConfig::access, &AccessPolicy::grant_window_ms));
    k.push_back(uint_key("change_timeout_ms", &HarnessConfig::access, &AccessPolicy::change_timeout_ms));
    k.push_back(real_key("controller_supply_volts", &HarnessConfig::access, &AccessPolicy::supply_volts));
    k.push_back({"factory_admin_pin",
                 [](HarnessConfig& c, std::string_view v) {
                   c.access.factory_admin_pin = std::string(v);
                   return true;
                 },
                 [](const HarnessConfig& c) { return c.access.factory_admin_pin; }});
    k.push_back({"factory_user_pin",
                 [](HarnessConfig& c, std::string_view v) {
                   c.access.factory_user_pin = std::string(v);
                   return true;
                 },
                 [](const HarnessConfig& c) { return c.access.factory_user_pin; }});
    k.push_back({"credential_store_path",
                 [](HarnessConfig& c, std::string_view v) {
                   c.credential_store_path = std::string(v);
                   return true;
                 },
                 [](const HarnessConfig& c) { return c.credential_store_path; }});
    k.push_back(real_key("actuation_threshold_kg", &HarnessConfig::mat, &MatConfig::actuation_threshold_kg));
    k.push_back(uint_key("poll_period_ms", &HarnessConfig::mat, &MatConfig::poll_period_ms));
    k.push_back(real_key("cable_m", &HarnessConfig::mat, &MatConfig::cable_m));
    k.push_back(uint_key("stable_ms", &HarnessConfig::debounce, &DebounceConfig::stable_ms));
    k.push_back({"key_hold_ms",
                 [](HarnessConfig& c, std::string_view v) {
                   auto n = parse_uint<SimTime>(v);
                   if (n) c.key_hold_ms = *n;
                   return n.has_value();
                 },
                 [](const HarnessConfig& c) { return std::to_string(c.key_hold_ms); }});
    k.push_back({"sink",
                 [](HarnessConfig& c, std::string_view v) {
                   if (v == "horn") {
                     c.sink.kind = SinkKind::Horn;
                   } else if (v == "beacon") {
                     c.sink.kind = SinkKind::Beacon;
                   } else {
                     return false;
                   }
                   return true;
                 },
                 [](const HarnessConfig& c) { return std::string(to_string(c.sink.kind)); }});
    k.push_back(uint_key("blink_period_ms", &HarnessConfig::sink, &SinkConfig::blink_period_ms));
    std::sort(k.begin(), k.end(), [](const ConfigKey& a, const ConfigKey& b) { return a.name < b.name; });
    return k;
  }();
  return keys;
}

std::string read_file(const std::filesystem::path& path, ErrorCode code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError(code, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

void HarnessConfig::validate() const {
  detector.validate();
  access.validate();
  mat.validate();
  sink.validate();
  if (debounce.stable_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "stable_ms must be >= 1");
  if (key_hold_ms < 1) throw SimError(ErrorCode::ConfigInvalid, "key_hold_ms must be >= 1");
}

HarnessConfig parse_config(std::string_view text) {
  HarnessConfig cfg;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(strip_comment(lines[i]));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw SimError(ErrorCode::ConfigInvalid, where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
    if (it == keys.end()) throw SimError(ErrorCode::ConfigInvalid, where + "unknown key '" + std::string(key) + "'");
    if (!it->set(cfg, value)) {
      throw SimError(ErrorCode::ConfigInvalid, where + "bad value '" + std::string(value) + "' for " + std::string(key));
    }
  }
  cfg.validate();
  return cfg;
}

HarnessConfig load_config_file(const std::filesystem::path& path) {
  return parse_config(read_file(path, ErrorCode::IoError));
}

std::string format_config(const HarnessConfig& cfg) {
  std::string out;
  for (const auto& key : config_keys()) {
    out += key.name;
    out += " = ";
    out += key.get(cfg);
    out += '\n';
  }
  return out;
}

std::string config_digest(const HarnessConfig& cfg) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_config(cfg)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

// ---------------------------------------------------------------------------
// Scenario DSL

ParseError::ParseError(std::size_t line, std::string reason)
    : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(std::move(reason)) {}

namespace {

Action parse_action(std::span<const std::string_view> t, std::size_t line) {
  auto fail = [line](const std::string& why) -> ParseError { return ParseError(line, why); };
  if (t.empty()) throw fail("missing action after time");
  const auto verb = t[0];

  if (verb == "power") {
    if (t.size() != 2) throw fail("expected 'power on|off'");
    if (t[1] == "on") return PowerAction{PowerState::On};
    if (t[1] == "off") return PowerAction{PowerState::Off};
    throw fail("power state must be 'on' or 'off'");
  }

  if (verb == "keypad") {
    if (t.size() != 4 && t.size() != 7) throw fail("expected 'keypad inside|outside press <key> [bounce <n> <gap_ms>]'");
    KeyPress press;
    if (t[1] == "inside") {
      press.side = KeypadSide::Inside;
    } else if (t[1] == "outside") {
      press.side = KeypadSide::Outside;
    } else {
      throw fail("keypad side must be 'inside' or 'outside'");
    }
    if (t[2] != "press") throw fail("expected 'press' after keypad side");
    auto key = parse_key_token(t[3]);
    if (!key) throw fail("unknown key '" + std::string(t[3]) + "'");
    press.key = *key;
    if (t.size() == 7) {
      if (t[4] != "bounce") throw fail("expected 'bounce <n> <gap_ms>'");
      auto n = parse_uint<std::uint32_t>(t[5]);
      auto gap = parse_uint<std::uint64_t>(t[6]);
      if (!n || *n < 1) throw fail("bounce edge count must be a positive integer");
      if (!gap || *gap < 1) throw fail("bounce gap must be a positive integer");
      press.bounce_edges = *n;
      press.bounce_gap_ms = *gap;
    }
    return press;
  }

  if (verb == "detector") {
    if (t.size() != 4 || t[1] != "target") throw fail("expected 'detector target mass=<g> distance=<cm>'");
    if (!t[2].starts_with("mass=") || !t[3].starts_with("distance=")) {
      throw fail("expected 'mass=<g> distance=<cm>'");
    }
    auto mass = parse_nonneg_real(t[2].substr(5));
    auto dist = parse_nonneg_real(t[3].substr(9));
    if (!mass) throw fail("bad mass '" + std::string(t[2].substr(5)) + "'");
    if (!dist) throw fail("bad distance '" + std::string(t[3].substr(9)) + "'");
    return DetectorScan{*mass, *dist};
  }

  if (verb == "mat") {
    if (t.size() == 2 && t[1] == "unload") return MatUnload{};
    if (t.size() == 3 && t[1] == "load") {
      auto kg = parse_nonneg_real(t[2]);
      if (!kg) throw fail("bad load '" + std::string(t[2]) + "'");
      return MatLoad{*kg};
    }
    if (t.size() == 4 && t[1] == "wire") {
      auto wire = parse_uint<int>(t[2]);
      if (!wire || *wire < 1 || *wire > 4) throw fail("wire must be 1-4");
      if (t[3] == "open") return MatWire{*wire, WireCondition::Open};
      if (t[3] == "intact") return MatWire{*wire, WireCondition::Intact};
      throw fail("wire condition must be 'open' or 'intact'");
    }
    throw fail("expected 'mat load <kg>', 'mat unload' or 'mat wire <1-4> open|intact'");
  }

  if (verb == "alarm") {
    if (t.size() == 2 && t[1] == "reset") return AlarmReset{};
    throw fail("expected 'alarm reset'");
  }

  throw fail("unknown verb '" + std::string(verb) + "'");
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario scenario;
  bool named = false;
  std::optional<std::size_t> end_line;
  std::vector<std::pair<std::size_t, TimedStimulus>> staged;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto tokens = split_ws(strip_comment(lines[i]));
    if (tokens.empty()) continue;
    if (end_line) throw ParseError(line_no, "stimulus after 'end'");

    const auto directive = tokens[0];
    if (directive == "scenario") {
      if (named) throw ParseError(line_no, "duplicate 'scenario' line");
      if (tokens.size() != 2 || !valid_name(tokens[1])) {
        throw ParseError(line_no, "expected 'scenario <name>' with a name of letters, digits, '_', '-' or '.'");
      }
      scenario.name = std::string(tokens[1]);
      named = true;
    } else if (directive == "end") {
      if (tokens.size() != 2) throw ParseError(line_no, "expected 'end <ms>'");
      auto end = parse_uint<SimTime>(tokens[1]);
      if (!end) throw ParseError(line_no, "bad end time '" + std::string(tokens[1]) + "'");
      scenario.end_ms = *end;
      end_line = line_no;
    } else if (directive == "at") {
      if (tokens.size() < 2) throw ParseError(line_no, "expected 'at <ms> <action>'");
      auto at = parse_uint<SimTime>(tokens[1]);
      if (!at) throw ParseError(line_no, "bad time '" + std::string(tokens[1]) + "'");
      auto action = parse_action(std::span(tokens).subspan(2), line_no);
      std::string target(target_of(action));
      staged.emplace_back(line_no, TimedStimulus{*at, std::move(target), std::move(action)});
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(directive) + "'");
    }
  }

  if (!end_line) throw ParseError(std::max<std::size_t>(lines.size(), 1), "missing 'end'");
  for (const auto& [line_no, stimulus] : staged) {
    if (stimulus.at > scenario.end_ms) throw ParseError(line_no, "stimulus after 'end' time");
  }
  std::stable_sort(staged.begin(), staged.end(),
                   [](const auto& a, const auto& b) { return a.second.at < b.second.at; });
  scenario.stimuli.reserve(staged.size());
  for (auto& [line_no, stimulus] : staged) scenario.stimuli.push_back(std::move(stimulus));
  return scenario;
}

std::string format_scenario(const Scenario& scenario) {
  std::string out = "scenario " + scenario.name + "\n";
  for (const auto& s : scenario.stimuli) {
    out += "at " + std::to_string(s.at) + " " + format_action(s.action) + "\n";
  }
  out += "end " + std::to_string(scenario.end_ms) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Running

Simulation::Simulation(const HarnessConfig& cfg, std::unique_ptr<CredentialStorage> storage) {
  cfg.validate();
  if (!storage) {
    if (cfg.credential_store_path.empty()) {
      storage = std::make_unique<MemoryCredentialStorage>();
    } else {
      storage = std::make_unique<FileCredentialStorage>(cfg.credential_store_path);
    }
  }
  power_ = &engine_.add_device<PowerRail>(std::string(device_id::kPower));
  detector_ = &engine_.add_device<DetectorDevice>(std::string(device_id::kDetector), cfg.detector);
  access_ = &engine_.add_device<AccessControllerDevice>(std::string(device_id::kAccess), cfg.access,
                                                        std::move(storage), cfg.debounce, cfg.key_hold_ms);
  mat_ = &engine_.add_device<MatDevice>(std::string(device_id::kMat), cfg.mat);
  alarm_ = &engine_.add_device<AlarmDevice>(std::string(device_id::kAlarm), cfg.sink);
  engine_.set_line("mat.stop", LogicLevel::High);
}

void Simulation::load(const Scenario& scenario) {
  for (const auto& s : scenario.stimuli) engine_.schedule(s);
}

Report run_scenario(const Scenario& scenario, const HarnessConfig& cfg) {
  Simulation sim(cfg);
  sim.load(scenario);
  Report report;
  report.scenario = scenario.name;
  report.config_digest = config_digest(cfg);
  report.events = sim.engine().run_until(scenario.end_ms);
  for (const auto& e : report.events) ++report.counts[e.kind()];
  report.alarm_latched = sim.alarm().ever_latched();
  return report;
}

std::string audit_text(const Report& report) {
  std::string out;
  for (const auto& e : report.events) {
    out += std::to_string(e.at());
    out += '\t';
    out += e.source();
    out += '\t';
    out += e.kind();
    out += '\t';
    out += e.detail();
    out += '\n';
  }
  out += "SUMMARY\talarm_latched=";
  out += report.alarm_latched ? "true" : "false";
  out += '\n';
  return out;
}

void write_audit(const Report& report, const std::filesystem::path& path) {
  const std::string text = audit_text(report);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw SimError(ErrorCode::IoError, "cannot open audit log " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw SimError(ErrorCode::IoError, "cannot write audit log " + path.string());
}

std::string format_report(const Report& report) {
  std::ostringstream out;
  out << "scenario: " << report.scenario << '\n';
  out << "config:   " << report.config_digest << '\n';
  out << "events:   " << report.events.size() << '\n';
  for (const auto& e : report.events) {
    char when[32];
    std::snprintf(when, sizeof when, "%10llu", static_cast<unsigned long long>(e.at()));
    out << "  " << when << " ms  " << e.source() << "  " << e.kind();
    if (!e.detail().empty()) out << "  " << e.detail();
    out << '\n';
  }
  out << "counts:\n";
  for (const auto& [kind, n] : report.counts) out << "  " << kind << ' ' << n << '\n';
  out << "alarm_latched=" << (report.alarm_latched ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace layersim
