#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "xpoint/errors.hpp"
#include "xpoint/perf.hpp"

using namespace xpoint;

namespace {

ArchitectureConfig arch(std::size_t n, std::size_t m) {
  ArchitectureConfig c;
  c.n_bits = n;
  c.m_words = m;
  return c;
}

PerfReport default_sweep(const std::vector<std::size_t>& n, const std::vector<std::size_t>& m) {
  return sweep_area(ArchitectureConfig{}, n, m, MtjParams{}, OperatingPoint{},
                    fixtures::kWordTransistor);
}

}  // namespace

TEST(Area, PrintedFormula) {
  // (4*40 + 4*112 + 1026*112) / 4096
  EXPECT_NEAR(cell_area(arch(4, 1024)), (160.0 + 448.0 + 1026.0 * 112.0) / 4096.0, 1e-12);
  EXPECT_NEAR(cell_area(arch(4, 1024)), 28.203, 5e-4);
  EXPECT_DOUBLE_EQ(cell_area(arch(1, 1)), 488.0);
  auto v = arch(4, 1024);
  v.data_rows_only = true;
  EXPECT_NEAR(cell_area(v), (160.0 + 448.0 + 1024.0 * 112.0) / 4096.0, 1e-12);
  EXPECT_NEAR(cell_area(v), 28.14, 0.05);
}

TEST(Area, Asymptotic) {
  EXPECT_NEAR(cell_area_asymptotic(4, 112), 28.0, 1e-9);
  EXPECT_NEAR(cell_area_asymptotic(32, 112), 3.5, 1e-9);
  EXPECT_NEAR(cell_area_asymptotic(64, 112), 1.75, 1e-9);
  EXPECT_NEAR(cell_area_asymptotic(32, 405), 12.65625, 1e-9);
  EXPECT_NEAR(cell_area(arch(4, 1u << 24)), 28.0, 1e-4);
}

TEST(Area, PhysicalFloor) {
  EXPECT_NEAR(cell_area_physical_floor(65, 40), 4.0 * 1600.0 / 4225.0, 1e-12);
  EXPECT_NEAR(cell_area_physical_floor(65, 40), 1.515, 0.01);
  EXPECT_DOUBLE_EQ(cell_area_physical_floor(65, 65), 4.0);
  EXPECT_DOUBLE_EQ(cell_area_physical_floor(65, 32.5), 1.0);
  EXPECT_THROW(cell_area_physical_floor(0, 40), ParameterError);
}

TEST(Area, StrictlyDecreasingAndNearAsymptote) {
  for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    for (std::size_t m = 1; m <= 8192; m *= 2) {
      EXPECT_LT(cell_area(arch(n, m * 2)), cell_area(arch(n, m)));
      EXPECT_LT(cell_area(arch(n * 2, m)), cell_area(arch(n, m)));
      // The 1% bound only holds for small words: the (A_SA + A_write)/M term
      // does not shrink with N while the asymptote does.
      if (m >= 1024 && n <= 4) {
        const double asym = cell_area_asymptotic(n, 112);
        EXPECT_LT(std::abs(cell_area(arch(n, m)) - asym), 0.01 * asym) << n << " " << m;
      }
    }
  }
}

TEST(Energy, RectangularPulse) {
  OperationTrace t;
  WaveformSample a, b;
  a.t = 0.0;
  a.source_current = 100e-6;
  b.t = 1e-9;
  b.source_current = 100e-6;
  t.samples = {a, b};
  EXPECT_NEAR(dynamic_energy(t, 1.2), 0.12e-12, 1e-24);
  EXPECT_NEAR(dynamic_power(dynamic_energy(t, 1.2), 1e8), 0.12e-4, 1e-16);
  EXPECT_EQ(dynamic_energy(OperationTrace{}, 1.2), 0.0);
  t.samples[0].source_current = t.samples[1].source_current = 0.0;
  EXPECT_EQ(dynamic_energy(t, 1.2), 0.0);
}

TEST(Energy, LinearInVddAndAdditive) {
  auto arr = fixtures::array();
  const auto w1 = write_word(arr, {0, parse_bits("1011"), WriteMode::Parallel}, {});
  const auto w2 = write_word(arr, {1, parse_bits("0110"), WriteMode::Serial}, {});
  EXPECT_NEAR(dynamic_energy(w1, 2.4), 2.0 * dynamic_energy(w1, 1.2), 1e-9 * dynamic_energy(w1, 2.4));
  OperationTrace both = w1;
  both.append(w2);
  EXPECT_NEAR(dynamic_energy(both, 1.2), dynamic_energy(w1, 1.2) + dynamic_energy(w2, 1.2),
              1e-9 * dynamic_energy(both, 1.2));
}

TEST(Sweep, RowsAndConsistency) {
  const auto r = default_sweep({64, 2, 4}, {1024});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].n_bits, 2u);
  EXPECT_EQ(r.rows[2].n_bits, 64u);
  EXPECT_EQ(r.rows[1].area_eq4_f2, cell_area(arch(4, 1024)));
  EXPECT_EQ(r.rows[2].area_eq5_f2, 1.75);
  EXPECT_THROW(default_sweep({}, {1024}), ParameterError);
}

TEST(Sweep, WordsTrend) {
  const auto r = default_sweep({4}, {16, 64, 256, 1024, 4096});
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    EXPECT_LT(r.rows[k].area_eq4_f2, r.rows[k - 1].area_eq4_f2);
    EXPECT_GT(r.rows[k].area_eq4_f2, 28.0);
  }
}

TEST(Sweep, BitsTrend) {
  const auto r = default_sweep({2, 4, 8, 16, 32, 64}, {1024});
  const double tau = fixtures::tau_parallel();
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const double n = static_cast<double>(r.rows[k].n_bits);
    EXPECT_NEAR(r.rows[k].write_time_ns_serial, n * tau * 1e9, 1e-9);
    EXPECT_NEAR(r.rows[k].write_time_ns_parallel, 2.0 * tau * 1e9, 1e-12);
    if (k > 0) {
      EXPECT_DOUBLE_EQ(r.rows[k].area_eq5_f2, r.rows[k - 1].area_eq5_f2 / 2.0);
      EXPECT_LT(r.rows[k].area_eq4_f2, r.rows[k - 1].area_eq4_f2);
      EXPECT_EQ(r.rows[k].area_eq4_f2, cell_area(arch(r.rows[k].n_bits, 1024)));
    }
  }
}

TEST(Csv, RoundTripIsBitExact) {
  const auto r = default_sweep({2, 3, 5, 7, 64}, {10, 1000, 1024});
  const std::string csv = to_csv(r);
  EXPECT_TRUE(csv.starts_with(std::string(kPerfCsvHeader) + "\n"));
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(parse_perf_csv(csv), r);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 28.203125, 1e-300, 6.02214076e23, -0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(28.0), "28");
}

TEST(SensingPower, SingleBitWordHasNoSaving) {
  const auto a = fixtures::array(4, 1);
  const auto c = compare_sensing_power(a, 0, {});
  EXPECT_EQ(c.parallel, c.serial);
  EXPECT_EQ(c.saving_ratio, 0.0);
}

TEST(SensingPower, ParallelCheaperAndApSavesMore) {
  auto a = fixtures::array();
  a.set_word_state(0, parse_bits("1010"));
  a.set_word_state(2, parse_bits("0110"));
  const auto c = compare_sensing_power(a, 0, {});
  EXPECT_LT(c.parallel, c.serial);
  EXPECT_GT(c.saving_ratio, 0.0);
  EXPECT_GT(c.mean_saving(true), c.mean_saving(false));
}
