#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xpoint/config.hpp"
#include "xpoint/memory_ops.hpp"
#include "xpoint/perf.hpp"

namespace xpoint {

struct WriteOutcome {
  WriteSpec spec;
  std::vector<bool> before;
  std::size_t phases = 0;
  std::size_t switches = 0;
  double duration = 0.0;  // s, including setup gaps
  double energy = 0.0;    // J
  double peak_source_current = 0.0;
  // Sneak current at phase start relative to the driven cells' current, in %.
  std::optional<double> sneak_overhead_pct;
  // Worst |I| / Ic0 a cell outside the driven set saw in its disturb direction.
  double max_disturb_ratio = 0.0;
};

struct ReadOutcome {
  std::size_t word = 0;
  SenseResult result;
};

struct AnalyzeRow {
  std::string quantity;
  double value = 0.0;
  std::string unit;
};

struct ScenarioResult {
  ScenarioConfig config;
  OperationTrace trace;  // write/read timeline
  std::vector<WriteOutcome> writes;
  std::vector<ReadOutcome> reads;
  std::optional<PerfReport> sweep;
  std::optional<SensingPowerComparison> sensing;
  std::vector<WriteSourceCurrent> sneak;
  std::vector<AnalyzeRow> analysis;
};

/// Runs the scenario in memory. Simulation errors are rethrown with the
/// failing step named.
ScenarioResult simulate(const ScenarioConfig& cfg);

struct OutputFile {
  std::string name;
  std::string content;
};

/// Renders the result files: results.csv, summary.txt, plus waveform.csv and
/// reads.csv for write/read scenarios.
std::vector<OutputFile> emit_report(const ScenarioResult& result);

std::string waveform_csv(const OperationTrace& trace);
std::string summary_text(const ScenarioResult& result);

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::vector<std::pair<std::string, std::string>> checksums;  // file -> sha256
  double wall_time_s = 0.0;

  std::string to_json() const;
};

std::string sha256_hex(std::string_view data);
std::string tool_version();

/// Simulates, writes every output file plus manifest.json into `out_dir`.
RunManifest run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace xpoint
