// layersim: run a scenario script through the simulated security system.
//
// Exit codes: 0 completed run (alarmed or not), 2 usage/parse error,
// 3 config error, 4 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "layersim/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;

int exit_code_for(const layersim::SimError& err) {
  switch (err.code()) {
    case layersim::ErrorCode::ConfigInvalid:
    case layersim::ErrorCode::MalformedPin:
      return kExitConfig;
    default:
      return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for a layered intrusion-detection system"};
  std::string scenario_path;
  std::string config_path;
  std::string audit_path;
  std::string format = "text";
  app.add_option("--scenario", scenario_path, "Scenario script to run (required)");
  app.add_option("--config", config_path, "key = value config file; defaults apply to unset keys");
  app.add_option("--audit", audit_path, "Append the audit log to this file");
  app.add_option("--format", format, "Report format on standard output")->check(CLI::IsMember({"text", "lines"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }
  if (scenario_path.empty()) {
    std::cerr << "error: --scenario is required\n" << app.help();
    return kExitParse;
  }

  std::ifstream in(scenario_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read scenario " << scenario_path << '\n';
    return kExitIo;
  }
  std::ostringstream text;
  text << in.rdbuf();

  layersim::Scenario scenario;
  try {
    scenario = layersim::parse_scenario(text.str());
  } catch (const layersim::ParseError& e) {
    std::cerr << scenario_path << ":" << e.line() << ": " << e.reason() << '\n';
    return kExitParse;
  }

  try {
    layersim::HarnessConfig cfg;
    if (!config_path.empty()) {
      try {
        cfg = layersim::load_config_file(config_path);
      } catch (const layersim::SimError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return exit_code_for(e);
      }
    }
    const auto report = layersim::run_scenario(scenario, cfg);
    if (!audit_path.empty()) layersim::write_audit(report, audit_path);
    std::cout << (format == "lines" ? layersim::audit_text(report) : layersim::format_report(report));
  } catch (const layersim::SimError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}
