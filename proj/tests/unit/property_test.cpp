#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "xpoint/errors.hpp"
#include "xpoint/memory_ops.hpp"
#include "xpoint/perf.hpp"

using namespace xpoint;
using fixtures::bits_of;

namespace {

void randomise(CrossbarArray& a, std::mt19937_64& rng) {
  for (std::size_t w = 0; w < a.m_words(); ++w) a.set_word_state(w, bits_of(rng() % (1U << a.n_bits()), a.n_bits()));
}

std::size_t hamming(const std::vector<bool>& x, const std::vector<bool>& y) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += x[i] != y[i];
  return n;
}

}  // namespace

TEST(Property, SolverIsLinearWithoutClamping) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    auto a = CrossbarArray::plain(4, 3, MtjParams{});
    for (std::size_t w = 0; w < 4; ++w)
      for (std::size_t b = 0; b < 3; ++b) a.cell(w, b)->state = (rng() & 1U) ? MtjState::AP : MtjState::P;
    BiasCondition b1 = BiasCondition::all_floating(a);
    BiasCondition b2 = b1;
    b1.word_lines[0] = b2.word_lines[0] = LineBias::ground();
    b1.bit_lines[1] = LineBias::voltage(v(rng));
    b2.bit_lines[1] = LineBias::voltage(0.0);
    b1.bit_lines[2] = LineBias::voltage(0.0);
    b2.bit_lines[2] = LineBias::voltage(v(rng));
    BiasCondition sum = b1;
    sum.bit_lines[2] = b2.bit_lines[2];
    const auto s1 = solve(a, b1), s2 = solve(a, b2), s = solve(a, sum);
    for (std::size_t i = 0; i < s.device_currents.size(); ++i) {
      EXPECT_NEAR(s.device_currents[i], s1.device_currents[i] + s2.device_currents[i], 1e-15);
    }
  }
}

// The read decision equals the one an isolated data/reference resistor pair
// would give, whatever the rest of the array holds.
TEST(Property, BalancedSensingMatchesIsolatedPair) {
  std::mt19937_64 rng(17);
  const double r_ref = 0.5 * (mtj_resistance(MtjState::P, MtjParams{}) +
                              mtj_resistance(MtjState::AP, MtjParams{}));
  int checked = 0;
  for (int k = 0; k < 120; ++k) {
    auto a = fixtures::array();
    randomise(a, rng);
    const std::size_t w = rng() % 4;
    const auto r = read_word(a, w, {});
    const auto stored = a.read_word_state(w);
    for (std::size_t b = 0; b < 4; ++b) {
      const double r_data = mtj_resistance(a.data(w, b).state, MtjParams{});
      EXPECT_EQ(r.bits[b], r_data > r_ref);
      EXPECT_EQ(r.bits[b], stored[b]);
      ++checked;
    }
  }
  EXPECT_GE(checked, 400);
}

TEST(Property, ReadCurrentsOrdered) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 120; ++k) {
    auto a = fixtures::array();
    randomise(a, rng);
    const std::size_t w = rng() % 4;
    const auto r = read_word(a, w, {});
    for (std::size_t b = 0; b < 4; ++b) {
      const auto& c = r.branch_currents[b];
      if (r.bits[b]) {
        EXPECT_LT(c.read_final, c.ref_final);
      } else {
        EXPECT_GT(c.read_final, c.ref_final);
      }
    }
    EXPECT_LT(r.max_device_current_ratio, 1.0);
  }
}

TEST(Property, RandomWritesRoundTripWithHammingSwitches) {
  std::mt19937_64 rng(5);
  for (auto mode : {WriteMode::Parallel, WriteMode::Serial, WriteMode::SelfEnableSerial,
                    WriteMode::SelfEnableParallel}) {
    auto a = fixtures::array();
    randomise(a, rng);
    for (int k = 0; k < 25; ++k) {
      const std::size_t w = rng() % 4;
      const auto target = bits_of(rng() % 16, 4);
      const auto before_all = std::vector{a.read_word_state(0), a.read_word_state(1),
                                          a.read_word_state(2), a.read_word_state(3)};
      const auto t = write_word(a, {w, target, mode}, {});
      EXPECT_EQ(a.read_word_state(w), target) << to_string(mode);
      EXPECT_EQ(t.switch_count(), hamming(before_all[w], target)) << to_string(mode);
      for (std::size_t o = 0; o < 4; ++o) {
        if (o != w) {
          EXPECT_EQ(a.read_word_state(o), before_all[o]);
        }
      }
      EXPECT_GE(t.total_energy, 0.0);
    }
  }
}

TEST(Property, SerialWriteCostsMoreEnergyThanParallel) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    auto a = fixtures::array();
    randomise(a, rng);
    auto b = a;
    const std::size_t w = rng() % 4;
    const auto target = a.read_word_state(w);
    std::vector<bool> flipped(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) flipped[i] = !target[i];
    const auto tp = write_word(a, {w, flipped, WriteMode::Parallel}, {});
    const auto ts = write_word(b, {w, flipped, WriteMode::Serial}, {});
    EXPECT_GT(ts.total_energy, tp.total_energy);
    EXPECT_GT(ts.total_time, tp.total_time);
  }
}

TEST(Property, AreaDecreasesWithBothDimensions) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 200; ++k) {
    ArchitectureConfig c;
    c.n_bits = 1 + rng() % 128;
    c.m_words = 1 + rng() % 100000;
    auto bigger_n = c, bigger_m = c;
    bigger_n.n_bits += 1 + rng() % 8;
    bigger_m.m_words += 1 + rng() % 1000;
    EXPECT_LT(cell_area(bigger_n), cell_area(c));
    EXPECT_LT(cell_area(bigger_m), cell_area(c));
    EXPECT_GT(cell_area(c), cell_area_asymptotic(c.n_bits, c.a_se));
  }
}
