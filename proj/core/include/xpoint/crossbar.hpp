#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xpoint/device.hpp"

namespace xpoint {

/// Placement of devices on the line grid.
///
/// Balanced: M data words plus two reference words over 2N bit lines. Bit i
/// owns the line pair (2i, 2i+1); even words sit on the first line of each
/// pair and odd words on the second, so only half the cross-points are
/// populated. Reference word M (read against even words) sits on the second
/// line of each pair, reference word M+1 (read against odd words) on the first.
///
/// Plain: every cross-point of an M x N grid holds a data device and there
/// are no reference words. Used for sneak-path studies.
enum class Layout { Balanced, Plain };

struct WordDrivers {
  TransistorModel nmos;
  TransistorModel pmos;
  bool operator==(const WordDrivers&) const = default;
};

class CrossbarArray {
 public:
  static CrossbarArray balanced(std::size_t m_words, std::size_t n_bits, const MtjParams& params,
                                const TransistorModel& word_transistor,
                                double line_resistance = 0.0);
  static CrossbarArray plain(std::size_t m_words, std::size_t n_bits, const MtjParams& params,
                             std::optional<TransistorModel> word_transistor = std::nullopt,
                             double line_resistance = 0.0);

  Layout layout() const { return layout_; }
  std::size_t m_words() const { return m_words_; }
  std::size_t n_bits() const { return n_bits_; }
  std::size_t word_lines() const { return word_lines_; }
  std::size_t bit_lines() const { return bit_lines_; }
  double line_resistance() const { return line_resistance_; }
  void set_line_resistance(double r);

  // Cross-point access by physical line indices. Empty optional = no device.
  std::optional<MtjDevice>& cell(std::size_t word_line, std::size_t bit_line);
  const std::optional<MtjDevice>& cell(std::size_t word_line, std::size_t bit_line) const;

  // Logical (word, bit) addressing of data devices.
  std::size_t data_bit_line(std::size_t word, std::size_t bit) const;
  MtjDevice& data(std::size_t word, std::size_t bit);
  const MtjDevice& data(std::size_t word, std::size_t bit) const;

  // Reference word used when sensing `word`, and the bit line its device for
  // bit i sits on (the other branch of the sense amplifier).
  std::size_t reference_word_line(std::size_t word) const;
  std::size_t reference_bit_line(std::size_t word, std::size_t bit) const;
  // Data words sharing bit lines with `word` (same parity), excluding it.
  std::vector<std::size_t> same_parity_words(std::size_t word) const;

  const std::optional<WordDrivers>& drivers(std::size_t word_line) const {
    return drivers_[word_line];
  }
  void set_drivers(std::size_t word_line, std::optional<WordDrivers> d);

  const MtjParams& data_params() const { return params_; }

  std::vector<bool> read_word_state(std::size_t word) const;
  void set_word_state(std::size_t word, const std::vector<bool>& bits);
  void set_all(MtjState s);

  std::size_t device_count() const;

  std::string word_line_label(std::size_t word_line) const;
  std::string bit_line_label(std::size_t bit_line) const;

  bool operator==(const CrossbarArray&) const = default;

 private:
  CrossbarArray() = default;
  void check_word(std::size_t word) const;
  void check_bit(std::size_t bit) const;

  Layout layout_ = Layout::Plain;
  std::size_t m_words_ = 0;
  std::size_t n_bits_ = 0;
  std::size_t word_lines_ = 0;
  std::size_t bit_lines_ = 0;
  double line_resistance_ = 0.0;
  MtjParams params_{};
  std::vector<std::optional<MtjDevice>> cells_;
  std::vector<std::optional<WordDrivers>> drivers_;
};

/// Electrical boundary condition applied to one line.
struct LineBias {
  enum class Kind { Floating, Voltage, Current };
  Kind kind = Kind::Floating;
  double value = 0.0;
  // For Voltage: drive through this transistor instead of ideally.
  std::optional<TransistorModel> driver;

  static LineBias floating() { return {}; }
  static LineBias ground() { return {Kind::Voltage, 0.0, std::nullopt}; }
  static LineBias voltage(double v) { return {Kind::Voltage, v, std::nullopt}; }
  static LineBias current(double i) { return {Kind::Current, i, std::nullopt}; }
  static LineBias driven(double v, const TransistorModel& t) { return {Kind::Voltage, v, t}; }

  bool is_floating() const { return kind == Kind::Floating; }
  bool is_ideal_voltage() const { return kind == Kind::Voltage && !driver; }
  bool operator==(const LineBias&) const = default;
};

struct GateState {
  Gate nmos = Gate::Off;
  Gate pmos = Gate::Off;
  bool operator==(const GateState&) const = default;
};

struct BiasCondition {
  std::vector<LineBias> word_lines;
  std::vector<LineBias> bit_lines;
  std::vector<GateState> gates;  // one per word line
  double pmos_rail = 1.2;        // supply the PMOS pull-ups connect to
  double nmos_rail = 0.0;

  static BiasCondition all_floating(const CrossbarArray& array);
  bool operator==(const BiasCondition&) const = default;
};

/// Throws ParameterError if the bias does not fit the array or has every
/// line floating.
void validate(const BiasCondition& bias, const CrossbarArray& array);

// --- netlist ---------------------------------------------------------------

struct Node {
  std::string label;
  bool fixed = false;
  double voltage = 0.0;
};

enum class ElementKind { Device, Wire, WordNmos, WordPmos, LineDriver, CurrentSource };

/// Two-terminal element. Positive current flows from `a` to `b`.
struct Element {
  ElementKind kind = ElementKind::Wire;
  std::size_t a = 0;
  std::size_t b = 0;
  double resistance = 0.0;                 // Device, Wire, off transistor
  std::optional<TransistorModel> transistor;  // set for on transistors / drivers
  double current = 0.0;                    // CurrentSource value
  std::size_t word_line = 0;
  std::size_t bit_line = 0;
  bool is_line_on_bit_side = false;  // for LineDriver / CurrentSource
};

/// Linear system description: every line (segment) node and every element.
/// Fixed nodes are boundary conditions; the rest are unknowns.
struct Network {
  std::vector<Node> nodes;
  std::vector<Element> elements;
  // Attach-point node of each word line / bit line (driver side).
  std::vector<std::size_t> word_node;
  std::vector<std::size_t> bit_node;
  // Node of word line w at bit crossing b, and bit line b at word crossing w.
  std::vector<std::vector<std::size_t>> word_tap;
  std::vector<std::vector<std::size_t>> bit_tap;
  std::size_t word_line_count = 0;
  std::size_t bit_line_count = 0;

  std::size_t unknown_count() const;
};

Network build_network(const CrossbarArray& array, const BiasCondition& bias);

struct SolveOptions {
  std::size_t max_clamp_iterations = 0;  // 0 = transistor count + 2
};

struct NetworkSolution {
  std::vector<double> node_voltages;      // every netlist node
  std::vector<double> element_currents;   // per element, a -> b
  std::vector<double> word_line_voltages;  // attach-point voltage
  std::vector<double> bit_line_voltages;
  // Per cross-point (word_line * bit_lines + bit_line); 0 where no device.
  // Sign: positive from bit line to word line.
  std::vector<double> device_currents;
  std::vector<double> nmos_currents;  // word line -> rail, per word line
  std::vector<double> pmos_currents;  // rail -> word line, per word line
  // Current delivered into the array by each line's source (0 if floating).
  std::vector<double> word_source_currents;
  std::vector<double> bit_source_currents;
  std::vector<bool> clamped;  // per element, transistor clamped at i_sat
  std::size_t bit_lines = 0;
  std::size_t clamp_iterations = 0;
  double kcl_residual = 0.0;  // max |sum of currents| at unknown nodes, A
  // Same, relative to the magnitude of the terms summed at that node.
  double kcl_relative = 0.0;
  double max_branch_current = 0.0;
  double supply_power = 0.0;  // sum over fixed nodes of V * I_out

  double device_current(std::size_t word_line, std::size_t bit_line) const {
    return device_currents[word_line * bit_lines + bit_line];
  }
  /// Sum of currents sourced by fixed nodes at positive potential.
  double supply_current(const Network& net) const;
};

NetworkSolution solve_network(const Network& net, const SolveOptions& opt = {});
NetworkSolution solve(const CrossbarArray& array, const BiasCondition& bias,
                      const SolveOptions& opt = {});

// --- analysis --------------------------------------------------------------

struct SneakPath {
  std::size_t word_line = 0;
  double current = 0.0;
};

struct SneakBreakdown {
  double source = 0.0;     // current entering the selected bit line
  double main = 0.0;       // current through the addressed device
  double sneak_sum = 0.0;  // source - main
  std::vector<SneakPath> per_path;
};

/// Splits the current a selected bit line receives into the addressed
/// device and the sneak contributions through every other word on that line.
SneakBreakdown sneak_decomposition(const NetworkSolution& sol, const CrossbarArray& array,
                                   std::size_t word_line, std::size_t bit_line);

/// Node reference for equivalent_resistance.
struct LineRef {
  enum class Side { Word, Bit };
  Side side = Side::Word;
  std::size_t index = 0;
  bool operator==(const LineRef&) const = default;
};

/// Resistance seen between two lines with every other line floating, the
/// word transistors in the gate states of `bias` and their rails grounded.
/// Returns +infinity when the nodes are not connected.
double equivalent_resistance(const CrossbarArray& array, LineRef a, LineRef b,
                             const BiasCondition& bias);

}  // namespace xpoint
