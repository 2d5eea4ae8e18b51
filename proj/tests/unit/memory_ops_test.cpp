#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "xpoint/errors.hpp"
#include "xpoint/memory_ops.hpp"

using namespace xpoint;
using fixtures::bits_of;

namespace {

std::size_t switches_in(const OperationTrace& t, const std::string& phase_prefix) {
  // Switch events between the PhaseStart/PhaseEnd pair whose label starts with prefix.
  std::size_t n = 0;
  bool inside = false;
  for (const auto& e : t.events) {
    if (e.kind == TraceEvent::Kind::PhaseStart) inside = e.label.starts_with(phase_prefix);
    if (e.kind == TraceEvent::Kind::Switch && inside) ++n;
  }
  return n;
}

}  // namespace

TEST(SelectWord, GatesPerPhase) {
  const auto a = fixtures::array();
  const auto zero = select_word(a, 3, Phase::Zero, 1.2);
  const auto one = select_word(a, 3, Phase::One, 1.2);
  const auto read = select_word(a, 3, Phase::Read, 1.2);
  EXPECT_EQ(zero.gates[3].pmos, Gate::On);
  EXPECT_EQ(zero.gates[3].nmos, Gate::Off);
  EXPECT_EQ(one.gates[3].nmos, Gate::On);
  EXPECT_EQ(one.gates[3].pmos, Gate::Off);
  EXPECT_EQ(read.gates[3].nmos, Gate::On);
  EXPECT_EQ(read.gates[a.reference_word_line(3)].nmos, Gate::On);
  for (std::size_t w = 0; w < 4; ++w) {
    if (w == 3) continue;
    for (const auto* b : {&zero, &one, &read}) EXPECT_EQ(b->gates[w], GateState{});
  }
  EXPECT_THROW(select_word(a, 4, Phase::One, 1.2), ParameterError);
}

TEST(WriteParallel, AllOnesIsOnePhase) {
  auto a = fixtures::array();
  const OperatingPoint op;
  const auto t = write_word(a, {3, parse_bits("1111"), WriteMode::Parallel}, op);
  EXPECT_EQ(a.read_word_state(3), parse_bits("1111"));
  EXPECT_EQ(t.phase_count(), 1u);
  EXPECT_EQ(t.switch_count(), 4u);
  const double tau = fixtures::tau_parallel(op);
  const double dt = tau / 100.0;
  EXPECT_GE(t.total_time, op.drive.setup_time + tau - 1e-15);
  EXPECT_LE(t.total_time, op.drive.setup_time + tau + dt + 1e-15);
}

TEST(WriteParallel, NoChangeHasNoSwitchesAndNoEnergy) {
  auto a = fixtures::array();
  a.set_word_state(1, parse_bits("0110"));
  const auto t = write_word(a, {1, parse_bits("0110"), WriteMode::Parallel}, {});
  EXPECT_EQ(t.switch_count(), 0u);
  EXPECT_EQ(t.total_energy, 0.0);
}

TEST(WriteParallel, MixedWordUsesTwoPhases) {
  auto a = fixtures::array();
  const OperatingPoint op;
  a.set_word_state(2, parse_bits("0101"));
  const auto t = write_word(a, {2, parse_bits("1010"), WriteMode::Parallel}, op);
  EXPECT_EQ(a.read_word_state(2), parse_bits("1010"));
  EXPECT_EQ(t.phase_count(), 2u);
  EXPECT_EQ(switches_in(t, "phase '0'"), 2u);
  EXPECT_EQ(switches_in(t, "phase '1'"), 2u);
  EXPECT_LE(t.total_time, 2.0 * fixtures::tau_parallel(op) * 1.02 + 2.0 * op.drive.setup_time);
}

TEST(WriteParallel, OtherWordsUntouched) {
  auto a = fixtures::array();
  a.set_word_state(0, parse_bits("1100"));
  a.set_word_state(1, parse_bits("0011"));
  a.set_word_state(3, parse_bits("1001"));
  write_word(a, {2, parse_bits("1011"), WriteMode::Parallel}, {});
  EXPECT_EQ(a.read_word_state(0), parse_bits("1100"));
  EXPECT_EQ(a.read_word_state(1), parse_bits("0011"));
  EXPECT_EQ(a.read_word_state(3), parse_bits("1001"));
}

TEST(WriteSerial, OnePhasePerBit) {
  auto a = fixtures::array();
  const auto t = write_word(a, {0, parse_bits("1010"), WriteMode::Serial}, {});
  EXPECT_EQ(a.read_word_state(0), parse_bits("1010"));
  EXPECT_EQ(t.phase_count(), 4u);
  EXPECT_EQ(t.switch_count(), 2u);
}

TEST(WriteSerial, SingleBitWordMatchesParallel) {
  auto a = fixtures::array(4, 1);
  auto b = a;
  const auto ts = write_word(a, {1, {true}, WriteMode::Serial}, {});
  const auto tp = write_word(b, {1, {true}, WriteMode::Parallel}, {});
  EXPECT_EQ(ts.total_time, tp.total_time);
  EXPECT_EQ(ts.total_energy, tp.total_energy);
  EXPECT_EQ(ts.samples.size(), tp.samples.size());
  EXPECT_EQ(a, b);
}

TEST(WriteSelfEnable, OneSwitchForOneDifferingBit) {
  for (auto mode : {WriteMode::SelfEnableSerial, WriteMode::SelfEnableParallel}) {
    auto a = fixtures::array();
    a.set_word_state(1, parse_bits("1011"));
    const auto t = write_word(a, {1, parse_bits("1010"), mode}, {});
    EXPECT_EQ(t.switch_count(), 1u) << to_string(mode);
    EXPECT_EQ(a.read_word_state(1), parse_bits("1010"));
  }
}

TEST(WriteSelfEnable, EqualAndComplement) {
  auto a = fixtures::array();
  a.set_word_state(0, parse_bits("0110"));
  EXPECT_EQ(write_word(a, {0, parse_bits("0110"), WriteMode::SelfEnableSerial}, {}).switch_count(), 0u);
  EXPECT_EQ(write_word(a, {0, parse_bits("1001"), WriteMode::SelfEnableSerial}, {}).switch_count(), 4u);
}

TEST(WriteSelfEnable, StartsWithARead) {
  auto a = fixtures::array();
  const auto t = write_word(a, {0, parse_bits("0001"), WriteMode::SelfEnableParallel}, {});
  ASSERT_FALSE(t.events.empty());
  EXPECT_TRUE(t.events.front().label.starts_with("read"));
}

TEST(Write, RequestValidation) {
  auto a = fixtures::array();
  EXPECT_THROW(write_word(a, {4, parse_bits("0000"), WriteMode::Parallel}, {}), ParameterError);
  EXPECT_THROW(write_word(a, {0, parse_bits("000"), WriteMode::Parallel}, {}), ParameterError);
  EXPECT_THROW(parse_bits("01x1"), ParameterError);
}

TEST(Write, StarvedDriveFailsNamingDevice) {
  auto a = fixtures::array();
  OperatingPoint op;
  op.drive.disturb_margin = 0.1;
  try {
    write_word(a, {0, parse_bits("1000"), WriteMode::Parallel}, op);
    FAIL() << "expected WriteFailure";
  } catch (const WriteFailure& e) {
    EXPECT_NE(std::string(e.what()).find("WL0/BL0a"), std::string::npos) << e.what();
  }
}

TEST(Trace, EventsOrderedAndEnergyAdditive) {
  auto a = fixtures::array();
  a.set_word_state(3, parse_bits("0110"));
  const auto t = write_word(a, {3, parse_bits("1001"), WriteMode::SelfEnableParallel}, {});
  EXPECT_TRUE(std::is_sorted(t.events.begin(), t.events.end(),
                             [](const auto& x, const auto& y) { return x.t < y.t; }));
  double sum = 0.0;
  for (const auto& e : t.events)
    if (e.kind == TraceEvent::Kind::PhaseEnd) sum += e.energy;
  EXPECT_NEAR(t.total_energy, sum, 1e-9 * t.total_energy);
  EXPECT_NEAR(t.total_energy, integrate_power(t.samples), 1e-9 * t.total_energy);
  EXPECT_TRUE(std::is_sorted(t.samples.begin(), t.samples.end(),
                             [](const auto& x, const auto& y) { return x.t < y.t; }));
}

TEST(Trace, SmallerStepConvergesToTau) {
  OperatingPoint op;
  const double tau = fixtures::tau_parallel(op);
  op.drive.dt = tau / 1000.0;
  auto a = fixtures::array();
  const auto t = write_word(a, {0, parse_bits("1111"), WriteMode::Parallel}, op);
  EXPECT_NEAR(t.total_time - op.drive.setup_time, tau, tau / 1000.0 + 1e-15);
}

TEST(Trace, IntegratePowerRectangle) {
  std::vector<WaveformSample> s(2);
  s[0].t = 0.0;
  s[0].power = 1e-3;
  s[1].t = 2e-9;
  s[1].power = 1e-3;
  EXPECT_NEAR(integrate_power(s), 2e-12, 1e-24);
  EXPECT_EQ(integrate_power({}), 0.0);
}

TEST(WriteMode, Names) {
  for (auto m : {WriteMode::Parallel, WriteMode::Serial, WriteMode::SelfEnableSerial,
                 WriteMode::SelfEnableParallel})
    EXPECT_EQ(parse_write_mode(to_string(m)), m);
  EXPECT_FALSE(parse_write_mode("dense").has_value());
}

TEST(SourceCurrents, GrowWithFloatingLines) {
  const auto a = fixtures::array();
  const auto rows = write_source_currents(a, 2, 1, {});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(rows[0].sneak, 0.0, 1e-5 * rows[0].source);  // off-transistor leakage
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_GT(rows[k].source, rows[k - 1].source);
    EXPECT_GT(rows[k].sneak, 0.0);
  }
}

TEST(SourceCurrents, ExhaustiveBitPatternsStayMonotone) {
  for (unsigned v = 0; v < 16; ++v) {
    auto a = fixtures::array();
    for (std::size_t w = 0; w < 4; ++w) a.set_word_state(w, bits_of(v * (w + 3) % 16, 4));
    const auto rows = write_source_currents(a, 1, 0, {});
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_GT(rows[k].source, rows[k - 1].source) << v;
  }
}

TEST(Disturb, ExposureIsReportedWithoutCap) {
  auto a = fixtures::array();
  a.set_word_state(0, parse_bits("1111"));
  a.set_word_state(2, parse_bits("0111"));
  const auto t = write_word(a, {2, parse_bits("1111"), WriteMode::Serial}, {});
  EXPECT_EQ(a.read_word_state(2), parse_bits("1111"));
  EXPECT_GT(t.max_disturb_ratio, 0.0);
}

TEST(Disturb, CapBoundsExposureAndIntegratesEveryCell) {
  OperatingPoint op;
  op.drive.disturb_margin = 0.9;
  auto a = fixtures::array();
  a.set_word_state(1, parse_bits("0110"));
  const auto t = write_word(a, {3, parse_bits("1010"), WriteMode::Serial}, op);
  EXPECT_EQ(a.read_word_state(3), parse_bits("1010"));
  EXPECT_EQ(a.read_word_state(1), parse_bits("0110"));
  EXPECT_LE(t.max_disturb_ratio, 0.9 + 1e-9);
  // Capped phases run below the nominal drive, so they take longer.
  auto b = fixtures::array();
  b.set_word_state(1, parse_bits("0110"));
  EXPECT_GE(t.total_time, write_word(b, {3, parse_bits("1010"), WriteMode::Serial}, {}).total_time);
}

TEST(Disturb, MarginValidated) {
  DriveConfig d;
  d.disturb_margin = 1.5;
  EXPECT_THROW(validate(d), ParameterError);
  d.disturb_margin = 1.0;
  EXPECT_NO_THROW(validate(d));
}
