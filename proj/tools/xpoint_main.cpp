#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xpoint/config.hpp"
#include "xpoint/errors.hpp"
#include "xpoint/scenario.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 1, kSimulation = 2, kInvariant = 3 };

constexpr const char* kConfigEnv = "XPOINT_CONFIG_PATH";
constexpr const char* kDefaultName = "xpoint.yaml";

// Explicit --config wins, then each directory of XPOINT_CONFIG_PATH, then the
// working directory. No file at all means built-in defaults.
std::optional<fs::path> resolve_config(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv(kConfigEnv)) {
    std::stringstream ss(env);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      if (dir.empty()) continue;
      const fs::path p = fs::path(dir) / kDefaultName;
      if (fs::is_regular_file(p)) return p;
    }
  }
  if (fs::is_regular_file(kDefaultName)) return fs::path(kDefaultName);
  return std::nullopt;
}

xpoint::ScenarioConfig load(const std::string& flag, std::optional<std::uint64_t> seed) {
  const auto path = resolve_config(flag);
  xpoint::ScenarioConfig cfg = path ? xpoint::load_config(path->string()) : xpoint::ScenarioConfig{};
  if (seed) cfg.operation.seed = *seed;
  return cfg;
}

int run(xpoint::ScenarioConfig cfg, const std::string& out) {
  const xpoint::RunManifest m = xpoint::run_scenario(cfg, out);
  std::cout << "wrote " << m.checksums.size() + 1 << " files to " << out << " (config "
            << m.config_hash.substr(0, 12) << ")\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-point STT-MRAM array simulator"};
  app.set_version_flag("--version", xpoint::tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "xpoint_out";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Scenario config (YAML)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Seed for random initial array states");

  auto* simulate = app.add_subcommand("simulate", "Run the write/read (or study) scenario of the config");

  auto* sweep = app.add_subcommand("sweep", "Area/speed/power table over N and M");
  std::vector<std::size_t> sweep_n;
  std::vector<std::size_t> sweep_m;
  sweep->add_option("--n-bits", sweep_n, "Bits per word to sweep")->delimiter(',');
  sweep->add_option("--m-words", sweep_m, "Words per array to sweep")->delimiter(',');

  auto* analyze = app.add_subcommand("analyze", "Evaluate closed-form quantities");
  std::string quantity;
  analyze->add_option("quantity", quantity, "Print only this quantity (e.g. cell_area, i_c0)");
  std::optional<std::size_t> analyze_n;
  std::optional<std::size_t> analyze_m;
  analyze->add_option("--n-bits", analyze_n, "Override array.n_bits");
  analyze->add_option("--m-words", analyze_m, "Override array.m_words");

  auto* check = app.add_subcommand("validate", "Check the config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    xpoint::ScenarioConfig cfg = load(config_path, seed);

    if (*check) {
      xpoint::validate(cfg);
      std::cout << "config OK (" << xpoint::sha256_hex(xpoint::serialize(cfg)).substr(0, 12)
                << ")\n";
      return kOk;
    }
    if (*sweep) {
      cfg.operation.kind = xpoint::OperationKind::Sweep;
      if (!sweep_n.empty()) cfg.operation.sweep_n_bits = sweep_n;
      if (!sweep_m.empty()) cfg.operation.sweep_m_words = sweep_m;
      return run(cfg, out_dir);
    }
    if (*analyze) {
      cfg.operation.kind = xpoint::OperationKind::Analyze;
      if (analyze_n) cfg.array.n_bits = *analyze_n;
      if (analyze_m) cfg.array.m_words = *analyze_m;
      // Only the array geometry matters here; drop word addresses that may no
      // longer fit.
      cfg.operation.writes.clear();
      cfg.operation.reads.clear();
      cfg.operation.word = cfg.operation.bit = 0;
      const xpoint::ScenarioResult r = xpoint::simulate(cfg);
      bool found = quantity.empty();
      for (const auto& row : r.analysis) {
        if (!quantity.empty() && row.quantity != quantity) continue;
        found = true;
        std::cout << row.quantity << " = " << xpoint::format_double(row.value) << " " << row.unit
                  << "\n";
      }
      if (!found) {
        std::cerr << "unknown quantity '" << quantity << "'\n";
        return kConfig;
      }
      return kOk;
    }
    if (*simulate) return run(cfg, out_dir);
  } catch (const xpoint::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfig;
  } catch (const xpoint::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kConfig;
  } catch (const xpoint::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const xpoint::Error& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kSimulation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return kSimulation;
  }
  return kOk;
}
