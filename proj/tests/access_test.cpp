#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "layersim/access.hpp"
#include "layersim/harness.hpp"
#include "support/oracles.hpp"

namespace layersim {
namespace {

namespace fs = std::filesystem;

AccessPolicy policy_with_user(const std::string& user = "4291") {
  AccessPolicy p;
  p.factory_user_pin = user;
  return p;
}

struct Rig {
  explicit Rig(AccessPolicy policy = policy_with_user()) {
    auto store = std::make_unique<MemoryCredentialStorage>();
    storage = store.get();
    controller = std::make_unique<AccessController>(std::move(policy), std::move(store));
    controller->on_power(PowerState::On, 0);
  }

  std::vector<SimEvent> type(const std::string& keys, KeypadSide side = KeypadSide::Outside) {
    std::vector<SimEvent> all;
    for (char c : keys) {
      Key k = c == '#' ? Key::Open : c == 'C' ? Key::ChangePass : c == 'X' ? Key::Cancel : digit_key(c - '0');
      for (auto& e : controller->on_key(k, side, now)) all.push_back(std::move(e));
      now += 10;
    }
    return all;
  }

  MemoryCredentialStorage* storage = nullptr;
  std::unique_ptr<AccessController> controller;
  SimTime now = 10;
};

bool has_kind(const std::vector<SimEvent>& events, const std::string& kind) {
  return std::any_of(events.begin(), events.end(), [&](const SimEvent& e) { return e.kind() == kind; });
}

TEST(PinTest, LengthAndDigitRules) {
  EXPECT_FALSE(Pin::parse("123"));
  EXPECT_TRUE(Pin::parse("1234"));
  EXPECT_TRUE(Pin::parse("123456"));
  EXPECT_FALSE(Pin::parse("1234567"));
  EXPECT_FALSE(Pin::parse("12a4"));
  EXPECT_FALSE(Pin::parse(""));
  EXPECT_THROW(Pin::from("12"), SimError);
}

TEST(CredentialStoreTest, SerializedFormAndBudget) {
  const Credentials widest{Pin::from("999999"), Pin::from("999999")};
  const auto bytes = serialize_credentials(widest);
  EXPECT_EQ(bytes, "admin=999999\nuser=999999\n");
  EXPECT_LE(bytes.size(), kEepromBytes);
  EXPECT_EQ(parse_credentials(bytes), widest);
}

TEST(CredentialStoreTest, CorruptContentIsStoreIo) {
  for (std::string_view bad : {"admin=12\nuser=1234\n", "admin=1234\n", "nonsense", "admin=1234\nuser=1234\nx=1\n"}) {
    try {
      parse_credentials(bad);
      FAIL() << bad;
    } catch (const SimError& e) {
      EXPECT_EQ(e.code(), ErrorCode::StoreIo);
    }
  }
}

TEST(AccessControllerTest, ExactPinGrantsAndPulsesRelay) {
  Rig rig;
  const auto events = rig.type("4291#");
  EXPECT_TRUE(has_kind(events, "GRANTED"));
  EXPECT_TRUE(has_kind(events, "RELAY"));
  EXPECT_EQ(rig.controller->state().mode, ControllerMode::Granted);
  EXPECT_EQ(rig.controller->maglock_state(rig.now), LockState::Unlocked);
}

TEST(AccessControllerTest, DefaultFromOutsideIsRejected) {
  Rig rig;
  rig.type("002200");
  const auto before = rig.controller->state();
  const auto events = rig.controller->on_key(Key::Default, KeypadSide::Outside, 500);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind(), "REJECTED_SIDE");
  EXPECT_EQ(rig.controller->state().mode, before.mode);
  EXPECT_EQ(rig.controller->state().entry_buffer, before.entry_buffer);
}

TEST(AccessControllerTest, BufferKeepsFirstSixDigits) {
  Rig rig;
  rig.type("1234567");
  EXPECT_EQ(rig.controller->state().entry_buffer, "123456");
}

TEST(AccessControllerTest, VerifyMatchAndMismatch) {
  Rig rig;
  EXPECT_EQ(rig.controller->verify_pin("4292", 5).verdict, Verdict::Denied);
  EXPECT_EQ(rig.controller->state().consecutive_denials, 1);
  EXPECT_EQ(rig.controller->verify_pin("4291", 6).verdict, Verdict::Granted);
  EXPECT_EQ(rig.controller->state().consecutive_denials, 0);
}

TEST(AccessControllerTest, MalformedEntryCountsAsDenial) {
  Rig rig;
  const auto v = rig.controller->verify_pin("42", 5);
  EXPECT_TRUE(v.malformed);
  EXPECT_EQ(v.verdict, Verdict::Denied);
  EXPECT_EQ(rig.controller->state().consecutive_denials, 1);
}

TEST(AccessControllerTest, ExhaustiveFourDigitEntriesMatchOracle) {
  Rig rig;
  int granted = 0;
  char buf[5];
  for (int n = 0; n < 10000; ++n) {
    std::snprintf(buf, sizeof buf, "%04d", n);
    const bool got = rig.controller->verify_pin(buf, 100).verdict == Verdict::Granted;
    ASSERT_EQ(got, testing::naive_pin_match(buf, "002200", "4291")) << buf;
    granted += got;
  }
  EXPECT_EQ(granted, 1);
}

TEST(AccessControllerTest, ChangeUserPin) {
  Rig rig;
  EXPECT_EQ(rig.controller->change_pin("4291", "77321"), ChangeResult::Ok);
  EXPECT_EQ(rig.controller->verify_pin("77321", 1).verdict, Verdict::Granted);
  EXPECT_EQ(rig.controller->verify_pin("4291", 2).verdict, Verdict::Denied);
}

TEST(AccessControllerTest, ChangeWithWrongOldPinIsRejected) {
  Rig rig;
  const auto before = rig.controller->credentials();
  EXPECT_EQ(rig.controller->change_pin("0000", "5555"), ChangeResult::Rejected);
  EXPECT_EQ(rig.controller->credentials(), before);
  EXPECT_FALSE(rig.storage->read().has_value());
}

TEST(AccessControllerTest, ChangeToShortPinIsMalformed) {
  Rig rig;
  const auto before = rig.controller->credentials();
  EXPECT_EQ(rig.controller->change_pin("4291", "123"), ChangeResult::MalformedPin);
  EXPECT_EQ(rig.controller->credentials(), before);
}

TEST(AccessControllerTest, PersistFailureKeepsPriorPin) {
  Rig rig;
  rig.storage->fail_next_write();
  EXPECT_EQ(rig.controller->change_pin("4291", "8888"), ChangeResult::PersistFail);
  EXPECT_EQ(rig.controller->verify_pin("4291", 1).verdict, Verdict::Granted);
  EXPECT_EQ(rig.controller->verify_pin("8888", 2).verdict, Verdict::Denied);
}

TEST(AccessControllerTest, ChangeFlowThroughKeypad) {
  Rig rig;
  auto events = rig.type("C4291#55667#");
  EXPECT_TRUE(has_kind(events, "CHANGE_OK"));
  EXPECT_EQ(rig.controller->state().mode, ControllerMode::Idle);
  EXPECT_EQ(rig.controller->credentials()->user.digits(), "55667");
  EXPECT_EQ(*rig.storage->read(), "admin=002200\nuser=55667\n");
}

TEST(AccessControllerTest, ChangeFlowTimesOut) {
  Rig rig;
  rig.type("C42");
  EXPECT_EQ(rig.controller->state().mode, ControllerMode::ChangeAwaitOld);
  const SimTime deadline = *rig.controller->next_deadline();
  EXPECT_EQ(deadline, rig.now - 10 + 30000);
  EXPECT_TRUE(rig.controller->tick(deadline - 1).empty());
  const auto events = rig.controller->tick(deadline);
  EXPECT_TRUE(has_kind(events, "CHANGE_TIMEOUT"));
  EXPECT_EQ(rig.controller->state().mode, ControllerMode::Idle);
  EXPECT_TRUE(rig.controller->state().entry_buffer.empty());
}

TEST(AccessControllerTest, CancelClearsBuffer) {
  Rig rig;
  rig.type("12X");
  EXPECT_TRUE(rig.controller->state().entry_buffer.empty());
  EXPECT_EQ(rig.controller->state().mode, ControllerMode::Idle);
}

TEST(AccessControllerTest, ResetFromInsideRestoresUserPin) {
  Rig rig;
  ASSERT_EQ(rig.controller->change_pin("4291", "1111"), ChangeResult::Ok);
  ASSERT_EQ(rig.controller->change_pin("002200", "999999"), ChangeResult::Ok);
  rig.type("999999", KeypadSide::Inside);
  const auto events = rig.controller->on_key(Key::Reset, KeypadSide::Inside, 1000);
  EXPECT_TRUE(has_kind(events, "RESET_OK"));
  EXPECT_EQ(rig.controller->credentials()->user.digits(), "4291");
  EXPECT_EQ(rig.controller->credentials()->admin.digits(), "999999");
}

TEST(AccessControllerTest, DefaultFromInsideRestoresBothPins) {
  Rig rig;
  ASSERT_EQ(rig.controller->change_pin("4291", "1111"), ChangeResult::Ok);
  ASSERT_EQ(rig.controller->change_pin("002200", "999999"), ChangeResult::Ok);
  rig.type("999999", KeypadSide::Inside);
  const auto events = rig.controller->on_key(Key::Default, KeypadSide::Inside, 1000);
  EXPECT_TRUE(has_kind(events, "DEFAULT_OK"));
  EXPECT_EQ(rig.controller->credentials()->user.digits(), "4291");
  EXPECT_EQ(rig.controller->credentials()->admin.digits(), "002200");
}

TEST(AccessControllerTest, ResetWithoutAdminPinIsRejected) {
  Rig rig;
  rig.type("4291", KeypadSide::Inside);
  const auto events = rig.controller->on_key(Key::Reset, KeypadSide::Inside, 1000);
  EXPECT_TRUE(has_kind(events, "AUTH_REJECTED"));
}

TEST(AccessControllerTest, UnpoweredKeyFails) {
  AccessController c(policy_with_user(), nullptr);
  try {
    c.on_key(Key::D1, KeypadSide::Outside, 0);
    FAIL();
  } catch (const SimError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unpowered);
  }
}

TEST(AccessControllerTest, PowerOffUnlocksImmediately) {
  Rig rig;
  EXPECT_EQ(rig.controller->maglock_state(50), LockState::Locked);
  rig.controller->on_power(PowerState::Off, 60);
  EXPECT_EQ(rig.controller->maglock_state(60), LockState::Unlocked);
  EXPECT_EQ(rig.controller->state().mode, ControllerMode::Unpowered);
}

TEST(AccessControllerTest, GrantWindowSemantics) {
  Rig rig;
  rig.controller->verify_pin("4291", 1000);
  const SimTime expires = 1000 + rig.controller->policy().grant_window_ms;
  ASSERT_EQ(rig.controller->state().grant_expires_at, expires);
  EXPECT_EQ(rig.controller->maglock_state(1000), LockState::Unlocked);
  EXPECT_EQ(rig.controller->maglock_state(expires - 1), LockState::Unlocked);
  EXPECT_EQ(rig.controller->maglock_state(expires), LockState::Locked);
  rig.controller->tick(expires);
  EXPECT_EQ(rig.controller->state().mode, ControllerMode::Idle);
  EXPECT_EQ(rig.controller->maglock_state(expires), LockState::Locked);
}

TEST(AccessControllerTest, FirstPowerOnUsesFactoryDefaults) {
  AccessController c(AccessPolicy{}, nullptr);
  const auto events = c.on_power(PowerState::On, 0);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_NE(events[0].detail().find("pins=factory"), std::string::npos);
  EXPECT_EQ(c.credentials()->admin.digits(), "002200");
  EXPECT_EQ(c.credentials()->user.digits(), "1234");
}

TEST(AccessControllerTest, ChangedPinSurvivesPowerCycleThroughFile) {
  const auto dir = fs::temp_directory_path() / "layersim_access_test";
  fs::create_directories(dir);
  const auto path = dir / "creds.txt";
  fs::remove(path);
  {
    AccessController c(policy_with_user(), std::make_unique<FileCredentialStorage>(path));
    c.on_power(PowerState::On, 0);
    ASSERT_EQ(c.change_pin("4291", "77321"), ChangeResult::Ok);
    c.on_power(PowerState::Off, 10);
    c.on_power(PowerState::On, 20);
    EXPECT_EQ(c.verify_pin("77321", 30).verdict, Verdict::Granted);
  }
  EXPECT_LE(fs::file_size(path), kEepromBytes);
  AccessController fresh(policy_with_user(), std::make_unique<FileCredentialStorage>(path));
  fresh.on_power(PowerState::On, 0);
  EXPECT_EQ(fresh.verify_pin("77321", 1).verdict, Verdict::Granted);
  EXPECT_EQ(fresh.verify_pin("4291", 2).verdict, Verdict::Denied);
  fs::remove_all(dir);
}

TEST(AccessControllerTest, CorruptStoreFailsPowerOn) {
  auto store = std::make_unique<MemoryCredentialStorage>();
  store->write("admin=1\n");
  AccessController c(AccessPolicy{}, std::move(store));
  try {
    c.on_power(PowerState::On, 0);
    FAIL();
  } catch (const SimError& e) {
    EXPECT_EQ(e.code(), ErrorCode::StoreIo);
  }
}

TEST(AccessControllerTest, DenialLatch) {
  Rig rig;
  EXPECT_EQ(rig.controller->state().alarm_line, LogicLevel::Low);
  rig.controller->verify_pin("0000", 1);
  rig.controller->verify_pin("0000", 2);
  EXPECT_EQ(rig.controller->state().alarm_line, LogicLevel::Low);
  rig.controller->verify_pin("0000", 3);
  EXPECT_EQ(rig.controller->state().alarm_line, LogicLevel::High);
  auto events = rig.controller->take_events();
  EXPECT_EQ(std::count_if(events.begin(), events.end(), [](const SimEvent& e) { return e.kind() == "ALARM_LINE"; }), 1);
  rig.controller->verify_pin("0000", 4);
  EXPECT_EQ(rig.controller->state().alarm_line, LogicLevel::High);
  rig.controller->verify_pin("4291", 5);
  EXPECT_EQ(rig.controller->state().alarm_line, LogicLevel::Low);

  for (int i = 0; i < 3; ++i) rig.controller->verify_pin("1", 10000 + i);
  EXPECT_EQ(rig.controller->state().alarm_line, LogicLevel::High);
  rig.controller->on_power(PowerState::Off, 20000);
  rig.controller->on_power(PowerState::On, 20001);
  EXPECT_EQ(rig.controller->state().alarm_line, LogicLevel::Low);
  EXPECT_EQ(rig.controller->state().consecutive_denials, 0);
}

TEST(AccessControllerTest, VerificationNeverTouchesStore) {
  Rig rig;
  ASSERT_EQ(rig.controller->change_pin("4291", "31415"), ChangeResult::Ok);
  const auto before = *rig.storage->read();
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(0, 8);
  std::uniform_int_distribution<int> digit(0, 9);
  for (int i = 0; i < 1000; ++i) {
    std::string entry;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) entry.push_back(static_cast<char>('0' + digit(rng)));
    rig.controller->verify_pin(entry, static_cast<SimTime>(100 + i));
  }
  EXPECT_EQ(*rig.storage->read(), before);
}

TEST(AccessControllerTest, OutsideKeypadNeverMutatesCredentials) {
  // Every single command from outside, with and without the admin PIN typed.
  for (int k = 0; k < kKeyCount; ++k) {
    for (bool primed : {false, true}) {
      Rig rig;
      if (primed) rig.type("002200");
      const auto before = rig.controller->credentials();
      rig.controller->on_key(static_cast<Key>(k), KeypadSide::Outside, 999);
      EXPECT_EQ(rig.controller->credentials(), before);
      EXPECT_FALSE(rig.storage->read().has_value());
    }
  }
  // Longer random outside traces restricted to RESET/DEFAULT/digits/OPEN/CANCEL.
  std::mt19937_64 rng(21);
  const std::array<Key, 6> pool{Key::Reset, Key::Default, Key::D0, Key::D2, Key::Open, Key::Cancel};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    Rig rig;
    const auto before = rig.controller->credentials();
    SimTime t = 100;
    for (int i = 0; i < 40; ++i) {
      rig.controller->on_key(pool[pick(rng)], KeypadSide::Outside, t);
      t += 10;
    }
    EXPECT_EQ(rig.controller->credentials(), before);
  }
}

TEST(ExpandPressTest, BounceEdgesThenRelease) {
  const auto samples = expand_press({KeypadSide::Inside, Key::D4, 3, 2}, 100, 100);
  const std::vector<Sample> expected{
      {100, LogicLevel::High}, {102, LogicLevel::Low}, {104, LogicLevel::High}, {204, LogicLevel::Low}};
  EXPECT_EQ(samples, expected);
}

TEST(AccessDeviceTest, BouncedPressAcceptedOnce) {
  HarnessConfig cfg;
  Simulation sim(cfg);
  sim.engine().schedule({0, "power", PowerAction{PowerState::On}});
  sim.engine().schedule({100, "access-controller", KeyPress{KeypadSide::Inside, Key::D4, 3, 2}});
  const auto log = sim.engine().run_until(1000);
  std::vector<SimTime> keys;
  for (const auto& e : log) {
    if (e.kind() == "KEY") keys.push_back(e.at());
  }
  // Settles HIGH at 104; the reference filter accepts it at 124.
  auto raw = expand_press({KeypadSide::Inside, Key::D4, 3, 2}, 100, 100);
  raw.insert(raw.begin(), Sample{0, LogicLevel::Low});
  const auto ref = testing::reference_debounce(raw, 20);
  ASSERT_EQ(ref.front(), (Sample{124, LogicLevel::High}));
  EXPECT_EQ(keys, std::vector<SimTime>{124});
  EXPECT_EQ(sim.access().controller().state().entry_buffer, "4");
}

TEST(AccessDeviceTest, GrantExpiresOnSchedule) {
  HarnessConfig cfg;
  cfg.access.factory_user_pin = "4291";
  Simulation sim(cfg);
  auto& e = sim.engine();
  e.schedule({0, "power", PowerAction{PowerState::On}});
  SimTime t = 100;
  for (Key k : {Key::D4, Key::D2, Key::D9, Key::D1, Key::Open}) {
    e.schedule({t, "access-controller", KeyPress{KeypadSide::Outside, k}});
    t += 150;
  }
  e.run_until(t);
  const SimTime granted_at = t - 150 + cfg.debounce.stable_ms;
  EXPECT_EQ(sim.access().controller().state().grant_expires_at, granted_at + 5000);
  EXPECT_EQ(e.line("access.grant"), LogicLevel::High);
  e.run_until(granted_at + 4999);
  EXPECT_EQ(sim.access().controller().maglock_state(e.now()), LockState::Unlocked);
  e.run_until(granted_at + 5000);
  EXPECT_EQ(sim.access().controller().maglock_state(e.now()), LockState::Locked);
  EXPECT_EQ(e.line("access.grant"), LogicLevel::Low);
  EXPECT_EQ(e.log().back().kind(), "GRANT_EXPIRED");
}

}  // namespace
}  // namespace layersim
