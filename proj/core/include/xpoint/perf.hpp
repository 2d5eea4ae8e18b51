#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xpoint/crossbar.hpp"
#include "xpoint/memory_ops.hpp"

namespace xpoint {

struct ArchitectureConfig {
  std::size_t n_bits = 4;
  std::size_t m_words = 1024;
  double a_sa = 40.0;      // F^2 per sense amplifier
  double a_write = 112.0;  // F^2 per bit write circuit
  double a_se = 112.0;     // F^2 per word selection circuit (405 in fast mode)
  double f_feature_nm = 65.0;
  double f_m_nm = 40.0;
  double v_dd = 1.2;
  double f_data_hz = 100e6;
  // Count M selection circuits instead of M + 2.
  bool data_rows_only = false;

  bool operator==(const ArchitectureConfig&) const = default;
};

void validate(const ArchitectureConfig& c);

/// Area per bit of the CMOS periphery, in F^2.
double cell_area(const ArchitectureConfig& c);
/// Large-M limit of cell_area: a_se / n_bits.
double cell_area_asymptotic(std::size_t n_bits, double a_se);
/// 4 F_M^2 expressed in CMOS F^2.
double cell_area_physical_floor(double f_feature_nm, double f_m_nm);

/// V_dd times the trapezoidal integral of the sampled source current.
double dynamic_energy(const OperationTrace& trace, double v_dd);
double dynamic_power(double energy, double f_data_hz);

/// One row of an area/speed/power sweep, in the units of the CSV columns.
struct PerfRow {
  std::size_t n_bits = 0;
  std::size_t m_words = 0;
  double area_eq4_f2 = 0.0;
  double area_eq5_f2 = 0.0;
  double write_time_ns_serial = 0.0;
  double write_time_ns_parallel = 0.0;
  double read_time_ns = 0.0;
  double write_energy_pj = 0.0;
  double read_energy_pj = 0.0;

  bool operator==(const PerfRow&) const = default;
};

struct PerfReport {
  std::vector<PerfRow> rows;  // sorted by (n_bits, m_words)
  bool operator==(const PerfReport&) const = default;
};

/// Closed-form timing and energy of one (N, M) point. Write times are
/// N serial switching delays and two parallel ones; energies assume a word of
/// half P, half AP cells at the nominal drive.
PerfRow evaluate_point(const ArchitectureConfig& c, const MtjParams& device,
                       const OperatingPoint& op, const TransistorModel& word_transistor);

PerfReport sweep_area(const ArchitectureConfig& c, const std::vector<std::size_t>& n_range,
                      const std::vector<std::size_t>& m_range, const MtjParams& device,
                      const OperatingPoint& op, const TransistorModel& word_transistor);

extern const char* const kPerfCsvHeader;
std::string to_csv(const PerfReport& r);
PerfReport parse_perf_csv(const std::string& text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct BitSensingEnergy {
  std::size_t bit = 0;
  bool value = false;
  double parallel = 0.0;  // J drawn by this bit's two branches
  double serial = 0.0;
  double saving = 0.0;  // 1 - parallel / serial
};

struct SensingPowerComparison {
  double parallel = 0.0;  // J per word read
  double serial = 0.0;
  double saving_ratio = 0.0;
  std::vector<BitSensingEnergy> per_bit;

  /// Mean per-bit saving over bits storing `value`; 0 if none do.
  double mean_saving(bool value) const;
};

SensingPowerComparison compare_sensing_power(const CrossbarArray& array, std::size_t word,
                                             const OperatingPoint& op);

}  // namespace xpoint
