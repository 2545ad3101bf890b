#pragma once

// Scenario DSL, config file, end-to-end runner and audit log.

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "layersim/access.hpp"
#include "layersim/core.hpp"
#include "layersim/detector.hpp"
#include "layersim/fusion.hpp"
#include "layersim/mat.hpp"

namespace layersim {

// ---------------------------------------------------------------------------
// Config

struct HarnessConfig {
  DetectorConfig detector;
  AccessPolicy access;
  MatConfig mat;
  DebounceConfig debounce;
  SinkConfig sink;
  SimTime key_hold_ms = 100;
  /// Empty means an in-memory store that starts blank for every run.
  std::string credential_store_path;

  /// Throws SimError(ConfigInvalid).
  void validate() const;
};

/// Parses `key = value` lines (`#` comments). Unset keys keep their
/// defaults; unknown keys and bad values throw SimError(ConfigInvalid).
HarnessConfig parse_config(std::string_view text);
HarnessConfig load_config_file(const std::filesystem::path& path);

/// Every key with its current value, one `key = value` line each, sorted.
std::string format_config(const HarnessConfig& cfg);

/// FNV-1a 64 over format_config(), as 16 hex digits.
std::string config_digest(const HarnessConfig& cfg);

// ---------------------------------------------------------------------------
// Scenario

struct Scenario {
  std::string name = "scenario";
  SimTime end_ms = 0;
  std::vector<TimedStimulus> stimuli;

  bool operator==(const Scenario&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string reason);

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

Scenario parse_scenario(std::string_view text);
/// Canonical text; parse_scenario(format_scenario(s)) == s.
std::string format_scenario(const Scenario& scenario);

// ---------------------------------------------------------------------------
// Running

/// All devices wired onto one engine. The mat stop signal and controller
/// alarm line feed the fusion gate; the detector feeds nothing.
class Simulation {
 public:
  explicit Simulation(const HarnessConfig& cfg, std::unique_ptr<CredentialStorage> storage = nullptr);

  void load(const Scenario& scenario);

  Engine& engine() noexcept { return engine_; }
  const Engine& engine() const noexcept { return engine_; }
  AccessControllerDevice& access() noexcept { return *access_; }
  const AccessControllerDevice& access() const noexcept { return *access_; }
  const MatDevice& mat() const noexcept { return *mat_; }
  const AlarmDevice& alarm() const noexcept { return *alarm_; }
  const DetectorDevice& detector() const noexcept { return *detector_; }
  const PowerRail& power() const noexcept { return *power_; }

 private:
  Engine engine_;
  PowerRail* power_ = nullptr;
  DetectorDevice* detector_ = nullptr;
  AccessControllerDevice* access_ = nullptr;
  MatDevice* mat_ = nullptr;
  AlarmDevice* alarm_ = nullptr;
};

struct Report {
  std::string scenario;
  std::string config_digest;
  std::vector<SimEvent> events;
  std::map<std::string, std::size_t> counts;
  /// True if the alarm latched at any point during the run.
  bool alarm_latched = false;
};

/// Throws SimError(ConfigInvalid) or SimError(StoreIo).
Report run_scenario(const Scenario& scenario, const HarnessConfig& cfg);

/// Audit lines `<ms>\t<source>\t<kind>\t<detail>\n` and the final
/// `SUMMARY\talarm_latched=<bool>\n`.
std::string audit_text(const Report& report);
/// Appends audit_text(report) to `path`. Throws SimError(IoError).
void write_audit(const Report& report, const std::filesystem::path& path);

/// Human-readable summary.
std::string format_report(const Report& report);

}  // namespace layersim
