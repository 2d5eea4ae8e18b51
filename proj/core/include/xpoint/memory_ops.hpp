#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xpoint/crossbar.hpp"
#include "xpoint/device.hpp"

namespace xpoint {

struct DriveConfig {
  double v_dd = 1.2;
  double v_read = 0.3;
  // Target write current through a switching cell, in units of its Ic0.
  double parallel_ratio = 3.0;
  double serial_ratio = 3.0;
  // When set, the write supply is capped so no cell outside the driven set
  // sees more than this many Ic0 in its disturb direction, and every cell in
  // the array is integrated (an unintended flip raises WriteDisturb). Unset,
  // only the driven cells switch and the exposure is just reported.
  std::optional<double> disturb_margin;
  std::optional<double> dt;  // s; default: switching delay at the mode drive / 100
  double c_load = 1e-15;
  double setup_time = 100e-12;
  double read_pulse = 1.1e-9;
  TransistorModel bit_driver{150.0, 5e-3, 1e9, 56.0};

  bool operator==(const DriveConfig&) const = default;
};

void validate(const DriveConfig& d);

struct OperatingPoint {
  SwitchingParams dynamics;
  DriveConfig drive;
};

enum class WriteMode { Parallel, Serial, SelfEnableSerial, SelfEnableParallel };
std::string to_string(WriteMode m);
std::optional<WriteMode> parse_write_mode(const std::string& s);

enum class Phase { Zero, One, Read };

struct WriteRequest {
  std::size_t word_addr = 0;
  std::vector<bool> data;
  WriteMode mode = WriteMode::Parallel;
};

std::vector<bool> parse_bits(const std::string& s);
std::string format_bits(const std::vector<bool>& bits);

// --- traces ----------------------------------------------------------------

struct TraceEvent {
  enum class Kind { PhaseStart, Switch, PhaseEnd };
  double t = 0.0;
  Kind kind = Kind::PhaseStart;
  std::string label;  // phase name, or device label for Switch
  std::size_t word_line = 0;
  std::size_t bit_line = 0;
  double current = 0.0;  // supply current, or device current for Switch
  double main_current = 0.0;  // PhaseStart: summed |I| through the driven cells
  double energy = 0.0;   // PhaseEnd: energy drawn during the phase
  double duration = 0.0;  // PhaseEnd: phase length
};

struct WaveformSample {
  double t = 0.0;
  double source_current = 0.0;  // current delivered by positive supplies
  double power = 0.0;           // sum of V * I over all sources
  std::vector<double> device_currents;
};

struct OperationTrace {
  std::vector<TraceEvent> events;
  std::vector<WaveformSample> samples;
  std::vector<std::string> device_labels;  // column order of device_currents
  double total_time = 0.0;
  double total_energy = 0.0;
  // Largest |I| / Ic0 a cell outside the driven set saw in its disturb direction.
  double max_disturb_ratio = 0.0;

  std::size_t count(TraceEvent::Kind k) const;
  std::size_t switch_count() const { return count(TraceEvent::Kind::Switch); }
  std::size_t phase_count() const { return count(TraceEvent::Kind::PhaseStart); }
  double max_source_current() const;
  /// Appends `other`, shifting its times by this trace's total_time.
  void append(const OperationTrace& other);
};

/// Trapezoidal integral of the sampled supply power.
double integrate_power(const std::vector<WaveformSample>& samples);

// --- protocol --------------------------------------------------------------

/// Word selection for a write phase or a read. `supply` is the rail the PMOS
/// pull-ups connect to. Bit lines are left floating.
BiasCondition select_word(const CrossbarArray& array, std::size_t word, Phase phase,
                          double supply);

OperationTrace write_word_parallel(CrossbarArray& array, const WriteRequest& req,
                                   const OperatingPoint& op);
OperationTrace write_word_serial(CrossbarArray& array, const WriteRequest& req,
                                 const OperatingPoint& op);
OperationTrace write_self_enable(CrossbarArray& array, const WriteRequest& req,
                                 const OperatingPoint& op);
/// Dispatches on req.mode.
OperationTrace write_word(CrossbarArray& array, const WriteRequest& req, const OperatingPoint& op);

/// Switching delay of one data cell at the mode's nominal drive.
double nominal_switching_delay(const CrossbarArray& array, const OperatingPoint& op, bool parallel);

// --- sensing ---------------------------------------------------------------

enum class ReadScheme { Parallel, BitSerial };

struct SenseDecision {
  bool bit = false;
  double delay = 0.0;  // time for the faster branch to reach the latch threshold
};

/// RC discharge race of the pre-charge sense amplifier. Higher data-branch
/// resistance discharges slower and latches '1'.
SenseDecision sense_bit(double r_data_branch, double r_ref_branch, double c_load, double v_dd);

struct BranchCurrents {
  double read_final = 0.0;  // current the data branch draws from the amplifier
  double ref_final = 0.0;
  double read_main = 0.0;  // through the addressed data cell
  double ref_main = 0.0;   // through the reference cell
};

struct SenseResult {
  std::vector<bool> bits;
  std::vector<double> per_bit_margin;  // R_ref_branch - R_data_branch, ohm
  std::vector<double> latch_delay;     // per bit, s
  double sense_delay = 0.0;            // one read cycle, s
  std::vector<BranchCurrents> branch_currents;
  double max_device_current_ratio = 0.0;  // max |I| / Ic0 over all devices
  OperationTrace trace;
};

SenseResult read_word(const CrossbarArray& array, std::size_t word, const OperatingPoint& op,
                      ReadScheme scheme = ReadScheme::Parallel);

/// Read bias with all (parallel) or only bit `bit`'s pair (bit-serial) of
/// bit lines driven at V_read.
BiasCondition read_bias(const CrossbarArray& array, std::size_t word, const OperatingPoint& op,
                        std::optional<std::size_t> only_bit = std::nullopt);

// --- sneak studies -----------------------------------------------------------

/// Source current of bit `bit` while it is written towards '1' at a fixed
/// write supply with `floating` of the other same-parity bit lines left
/// floating and the rest driven alongside it.
struct WriteSourceCurrent {
  std::size_t floating = 0;
  double source = 0.0;
  double main = 0.0;
  double sneak = 0.0;
};
std::vector<WriteSourceCurrent> write_source_currents(const CrossbarArray& array,
                                                      std::size_t word, std::size_t bit,
                                                      const OperatingPoint& op);

/// Fixed write supply that drives parallel_ratio * Ic0 through one isolated
/// P cell (driver + cell + word transistor).
double nominal_write_supply(const CrossbarArray& array, const OperatingPoint& op);

}  // namespace xpoint
