#include "xpoint/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "xpoint/errors.hpp"

namespace xpoint {

namespace {

// Rethrows library errors with the failing step prepended, keeping the type
// so the CLI can still map it to an exit code.
template <class Fn>
auto with_context(const std::string& ctx, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const WriteFailure& e) {
    throw WriteFailure(ctx + ": " + e.what());
  } catch (const WriteDisturb& e) {
    throw WriteDisturb(ctx + ": " + e.what());
  } catch (const ReadDisturb& e) {
    throw ReadDisturb(ctx + ": " + e.what());
  } catch (const IndeterminateRead& e) {
    throw IndeterminateRead(ctx + ": " + e.what());
  } catch (const SingularNetworkError& e) {
    throw SingularNetworkError(ctx + ": " + e.what(), e.floating_nodes());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(ctx + ": " + e.what());
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(ctx + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(ctx + ": " + e.what());
  }
}

std::optional<double> sneak_overhead(const OperationTrace& t) {
  double source = 0.0;
  double main = 0.0;
  for (const auto& e : t.events) {
    if (e.kind != TraceEvent::Kind::PhaseStart || e.main_current <= 0.0) continue;
    source += e.current;
    main += e.main_current;
  }
  if (main <= 0.0) return std::nullopt;
  return 100.0 * (source - main) / main;
}

void run_write_read(const ScenarioConfig& cfg, ScenarioResult& out) {
  CrossbarArray array = cfg.build_array();
  const OperatingPoint op = cfg.operating_point();
  const auto& o = cfg.operation;

  for (std::size_t i = 0; i < o.writes.size(); ++i) {
    const WriteSpec& w = o.writes[i];
    const std::string ctx = "write #" + std::to_string(i) + " (word " + std::to_string(w.word) +
                            " <- '" + w.data + "', " + to_string(o.mode) + ")";
    WriteOutcome res;
    res.spec = w;
    res.before = array.read_word_state(w.word);
    const WriteRequest req{w.word, parse_bits(w.data), o.mode};
    const OperationTrace t = with_context(ctx, [&] { return write_word(array, req, op); });
    if (array.read_word_state(w.word) != req.data) {
      throw InvariantViolation(ctx + ": stored word is '" +
                               format_bits(array.read_word_state(w.word)) + "' after the write");
    }
    res.phases = t.count(TraceEvent::Kind::PhaseStart);
    res.switches = t.switch_count();
    res.duration = t.total_time;
    res.energy = t.total_energy;
    res.peak_source_current = t.max_source_current();
    res.sneak_overhead_pct = sneak_overhead(t);
    res.max_disturb_ratio = t.max_disturb_ratio;
    out.trace.append(t);
    out.writes.push_back(std::move(res));
  }

  for (std::size_t word : o.reads) {
    const std::string ctx = "read of word " + std::to_string(word);
    SenseResult r = with_context(ctx, [&] { return read_word(array, word, op, o.read_scheme); });
    if (r.bits != array.read_word_state(word)) {
      throw InvariantViolation(ctx + ": sensed '" + format_bits(r.bits) + "' but the array stores '" +
                               format_bits(array.read_word_state(word)) + "'");
    }
    out.trace.append(r.trace);
    out.reads.push_back({word, std::move(r)});
  }
  if (out.trace.device_labels.empty()) {
    for (std::size_t w = 0; w < array.word_lines(); ++w)
      for (std::size_t l = 0; l < array.bit_lines(); ++l)
        if (array.cell(w, l))
          out.trace.device_labels.push_back(array.word_line_label(w) + "/" + array.bit_line_label(l));
  }
}

std::vector<AnalyzeRow> analyze(const ScenarioConfig& cfg) {
  const ArchitectureConfig arch = cfg.architecture_config();
  ArchitectureConfig variant = arch;
  variant.data_rows_only = !arch.data_rows_only;
  const MtjParams& d = cfg.device;
  const OperatingPoint op = cfg.operating_point();
  const double ic0 = critical_current(d);
  const auto tau = [&](double ratio) {
    const auto t = switching_delay(ratio * ic0, d, cfg.dynamics);
    return t ? *t : 0.0;
  };
  const CrossbarArray array = cfg.build_array();
  return {
      {arch.data_rows_only ? "cell_area_m_selectors" : "cell_area", cell_area(arch), "F2"},
      {arch.data_rows_only ? "cell_area" : "cell_area_m_selectors", cell_area(variant), "F2"},
      {"cell_area_asymptotic", cell_area_asymptotic(arch.n_bits, arch.a_se), "F2"},
      {"cell_area_physical_floor", cell_area_physical_floor(arch.f_feature_nm, arch.f_m_nm), "F2"},
      {"r_p", mtj_resistance(MtjState::P, d), "ohm"},
      {"r_ap", mtj_resistance(MtjState::AP, d), "ohm"},
      {"r_ref", mtj_resistance(MtjState::P, reference_params(d)), "ohm"},
      {"i_c0", ic0, "A"},
      {"switching_prefactor", switching_prefactor(d, cfg.dynamics), "1/(A*s)"},
      {"tau_serial", tau(cfg.drive.serial_ratio), "s"},
      {"tau_parallel", tau(cfg.drive.parallel_ratio), "s"},
      {"nominal_write_supply", nominal_write_supply(array, op), "V"},
      {"read_cycle", cfg.drive.setup_time + cfg.drive.read_pulse, "s"},
  };
}

}  // namespace

ScenarioResult simulate(const ScenarioConfig& cfg) {
  validate(cfg);
  ScenarioResult out;
  out.config = cfg;
  const OperatingPoint op = cfg.operating_point();
  switch (cfg.operation.kind) {
    case OperationKind::WriteRead:
      run_write_read(cfg, out);
      break;
    case OperationKind::Sweep:
      out.sweep = sweep_area(cfg.architecture_config(), cfg.operation.sweep_n_bits,
                             cfg.operation.sweep_m_words, cfg.device, op, cfg.transistor);
      break;
    case OperationKind::Sensing: {
      const CrossbarArray array = cfg.build_array();
      out.sensing = with_context("sensing study of word " + std::to_string(cfg.operation.word),
                                 [&] { return compare_sensing_power(array, cfg.operation.word, op); });
      break;
    }
    case OperationKind::Sneak: {
      const CrossbarArray array = cfg.build_array();
      out.sneak = with_context("sneak study", [&] {
        return write_source_currents(array, cfg.operation.word, cfg.operation.bit, op);
      });
      break;
    }
    case OperationKind::Analyze:
      out.analysis = analyze(cfg);
      break;
  }
  return out;
}

RunManifest run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioResult result = simulate(cfg);
  const std::vector<OutputFile> files = emit_report(result);

  std::filesystem::create_directories(out_dir);
  RunManifest m;
  m.config_hash = sha256_hex(serialize(cfg));
  m.version = tool_version();
  for (const auto& f : files) {
    std::ofstream os(out_dir / f.name, std::ios::binary | std::ios::trunc);
    os << f.content;
    if (!os) throw Error("cannot write " + (out_dir / f.name).string());
    m.checksums.emplace_back(f.name, sha256_hex(f.content));
  }
  m.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream os(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  os << m.to_json();
  if (!os) throw Error("cannot write " + (out_dir / "manifest.json").string());
  return m;
}

}  // namespace xpoint
