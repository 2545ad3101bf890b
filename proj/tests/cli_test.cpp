#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(LAYERSIM_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const char* name) { return (fs::path(LAYERSIM_SCENARIO_DIR) / name).string(); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("layersim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(CliTest, GrantedEntryExitsZero) {
  const auto r = run_cli("--scenario " + scenario("granted.scn"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("alarm_latched=false"), std::string::npos);
}

TEST_F(CliTest, AlarmedRunStillExitsZero) {
  const auto r = run_cli("--scenario " + scenario("intrusion.scn") + " --format lines");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("SUMMARY\talarm_latched=true\n"), std::string::npos);
}

TEST_F(CliTest, MissingScenarioIsUsageError) {
  const auto r = run_cli("");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("--scenario"), std::string::npos);
  EXPECT_NE(r.output.find("Usage"), std::string::npos);
}

TEST_F(CliTest, UnknownFlagIsUsageError) { EXPECT_EQ(run_cli("--scenario x --bogus").code, 2); }

TEST_F(CliTest, ParseErrorCitesLine) {
  const auto path = write("bad.scn", "at 0 power on\nat 100 frobnicate\nend 200\n");
  const auto r = run_cli("--scenario " + path.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find(":2:"), std::string::npos) << r.output;
}

TEST_F(CliTest, BadConfigExitsThree) {
  const auto cfg = write("bad.cfg", "colour = red\n");
  const auto r = run_cli("--scenario " + scenario("granted.scn") + " --config " + cfg.string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("colour"), std::string::npos);
}

TEST_F(CliTest, ConfigIsApplied) {
  const auto cfg = write("beacon.cfg", "sink = beacon\n");
  const auto r = run_cli("--scenario " + scenario("mat_fault.scn") + " --config " + cfg.string() + " --format lines");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("\tBLINK\t"), std::string::npos);
}

TEST_F(CliTest, MissingScenarioFileIsIoError) {
  EXPECT_EQ(run_cli("--scenario " + (dir_ / "nope.scn").string()).code, 4);
}

TEST_F(CliTest, UnwritableAuditIsIoError) {
  EXPECT_EQ(run_cli("--scenario " + scenario("granted.scn") + " --audit /nonexistent-dir/x/audit.log").code, 4);
}

TEST_F(CliTest, AuditFileMatchesLinesOutput) {
  const auto audit = dir_ / "audit.log";
  const auto r = run_cli("--scenario " + scenario("intrusion.scn") + " --format lines --audit " + audit.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream in(audit, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), r.output);
}

TEST_F(CliTest, BadFormatIsUsageError) {
  EXPECT_EQ(run_cli("--scenario " + scenario("granted.scn") + " --format json").code, 2);
}

}  // namespace
