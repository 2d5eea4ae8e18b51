#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "xpoint/crossbar.hpp"
#include "xpoint/device.hpp"
#include "xpoint/memory_ops.hpp"
#include "xpoint/perf.hpp"

namespace xpoint {

struct ArrayConfig {
  std::size_t n_bits = 4;
  std::size_t m_words = 4;
  Layout layout = Layout::Balanced;
  double line_resistance_ohm = 0.0;

  bool operator==(const ArrayConfig&) const = default;
};

struct AreaConfig {
  double a_sa_f2 = 40.0;
  double a_write_f2 = 112.0;
  double a_se_f2 = 112.0;
  double f_feature_nm = 65.0;
  double f_m_nm = 40.0;
  double f_data_hz = 100e6;
  bool data_rows_only = false;

  bool operator==(const AreaConfig&) const = default;
};

enum class OperationKind { WriteRead, Sweep, Sensing, Sneak, Analyze };
std::string to_string(OperationKind k);

enum class InitialState { AllP, AllAp, Random };
std::string to_string(InitialState s);

struct WriteSpec {
  std::size_t word = 0;
  std::string data;
  bool operator==(const WriteSpec&) const = default;
};

struct OperationConfig {
  OperationKind kind = OperationKind::WriteRead;
  WriteMode mode = WriteMode::Parallel;
  InitialState initial = InitialState::AllP;
  std::vector<WriteSpec> writes{{3, "1111"}};
  // Words read after the writes; empty reads nothing.
  std::vector<std::size_t> reads{0, 1, 2, 3};
  ReadScheme read_scheme = ReadScheme::Parallel;
  std::vector<std::size_t> sweep_n_bits{2, 4, 8, 16, 32, 64};
  std::vector<std::size_t> sweep_m_words{1024};
  // Sensing and sneak studies address this word (and bit).
  std::size_t word = 0;
  std::size_t bit = 0;
  std::uint64_t seed = 1;

  bool operator==(const OperationConfig&) const = default;
};

struct ScenarioConfig {
  MtjParams device;
  SwitchingParams dynamics;
  TransistorModel transistor;
  ArrayConfig array;
  DriveConfig drive;
  AreaConfig architecture;
  OperationConfig operation;

  bool operator==(const ScenarioConfig&) const = default;

  OperatingPoint operating_point() const { return {dynamics, drive}; }
  ArchitectureConfig architecture_config() const;
  /// Builds the array in its initial state (random states use operation.seed).
  CrossbarArray build_array() const;
};

/// Every problem found while reading a config, each naming its line and field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses YAML text. An empty document yields the defaults. Throws ConfigError
/// listing every unknown key, malformed value and out-of-range field.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize(const ScenarioConfig& cfg);

/// Runs every module's validation; throws ConfigError with all failures.
void validate(const ScenarioConfig& cfg);

}  // namespace xpoint
