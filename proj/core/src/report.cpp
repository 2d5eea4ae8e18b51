#include <openssl/evp.h>

#include <cstdio>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>

#include "xpoint/errors.hpp"
#include "xpoint/scenario.hpp"

namespace xpoint {

namespace {

std::string sig6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string num(double v) { return format_double(v); }

std::string bits_of(const std::vector<bool>& b) { return format_bits(b); }

std::string write_read_results(const ScenarioResult& r) {
  std::string s =
      "step,op,word,data,phases,switches,duration_ns,energy_pj,peak_source_uA,sneak_overhead_pct,max_disturb_ratio\n";
  std::size_t step = 0;
  for (const auto& w : r.writes) {
    s += std::to_string(step++) + ",write," + std::to_string(w.spec.word) + "," + w.spec.data +
         "," + std::to_string(w.phases) + "," + std::to_string(w.switches) + "," +
         num(w.duration * 1e9) + "," + num(w.energy * 1e12) + "," +
         num(w.peak_source_current * 1e6) + "," +
         (w.sneak_overhead_pct ? num(*w.sneak_overhead_pct) : "") + "," +
         num(w.max_disturb_ratio) + "\n";
  }
  for (const auto& rd : r.reads) {
    const auto& t = rd.result.trace;
    s += std::to_string(step++) + ",read," + std::to_string(rd.word) + "," +
         bits_of(rd.result.bits) + "," + std::to_string(t.phase_count()) + ",0," +
         num(rd.result.sense_delay * 1e9) + "," + num(t.total_energy * 1e12) + "," +
         num(t.max_source_current() * 1e6) + ",\n";
  }
  return s;
}

std::string reads_csv(const ScenarioResult& r) {
  std::string s =
      "word,bit,value,margin_ohm,i_read_final_uA,i_ref_final_uA,i_read_main_uA,i_ref_main_uA,"
      "latch_delay_ps\n";
  for (const auto& rd : r.reads) {
    const auto& res = rd.result;
    for (std::size_t b = 0; b < res.bits.size(); ++b) {
      const auto& c = res.branch_currents[b];
      s += std::to_string(rd.word) + "," + std::to_string(b) + "," + (res.bits[b] ? "1" : "0") +
           "," + num(res.per_bit_margin[b]) + "," + num(c.read_final * 1e6) + "," +
           num(c.ref_final * 1e6) + "," + num(c.read_main * 1e6) + "," + num(c.ref_main * 1e6) +
           "," + num(res.latch_delay[b] * 1e12) + "\n";
    }
  }
  return s;
}

std::string sensing_csv(const SensingPowerComparison& c) {
  std::string s = "bit,value,parallel_pj,serial_pj,saving\n";
  for (const auto& b : c.per_bit) {
    s += std::to_string(b.bit) + "," + (b.value ? "1" : "0") + "," + num(b.parallel * 1e12) +
         "," + num(b.serial * 1e12) + "," + num(b.saving) + "\n";
  }
  s += "word,," + num(c.parallel * 1e12) + "," + num(c.serial * 1e12) + "," + num(c.saving_ratio) +
       "\n";
  return s;
}

std::string sneak_csv(const std::vector<WriteSourceCurrent>& rows) {
  std::string s = "floating_lines,source_uA,main_uA,sneak_uA\n";
  for (const auto& r : rows) {
    s += std::to_string(r.floating) + "," + num(r.source * 1e6) + "," + num(r.main * 1e6) + "," +
         num(r.sneak * 1e6) + "\n";
  }
  return s;
}

std::string analysis_csv(const std::vector<AnalyzeRow>& rows) {
  std::string s = "quantity,value,unit\n";
  for (const auto& r : rows) s += r.quantity + "," + num(r.value) + "," + r.unit + "\n";
  return s;
}

}  // namespace

std::string waveform_csv(const OperationTrace& trace) {
  std::string s = "time_ns,source_current_uA";
  for (const auto& l : trace.device_labels) s += "," + l + "_uA";
  s += "\n";
  for (const auto& smp : trace.samples) {
    s += num(smp.t * 1e9) + "," + num(smp.source_current * 1e6);
    for (double i : smp.device_currents) s += "," + num(i * 1e6);
    s += "\n";
  }
  return s;
}

std::string summary_text(const ScenarioResult& r) {
  const ScenarioConfig& cfg = r.config;
  const ArchitectureConfig arch = cfg.architecture_config();
  std::string s = "xpoint " + tool_version() + " scenario: " + to_string(cfg.operation.kind) + "\n";
  s += "array: " + std::to_string(cfg.array.m_words) + " words x " +
       std::to_string(cfg.array.n_bits) + " bits, " +
       (cfg.array.layout == Layout::Balanced ? "balanced" : "plain") + " layout\n";
  s += "cell area: " + sig6(cell_area(arch)) + " F2/bit (asymptote " +
       sig6(cell_area_asymptotic(arch.n_bits, arch.a_se)) + ", physical floor " +
       sig6(cell_area_physical_floor(arch.f_feature_nm, arch.f_m_nm)) + ")\n";

  if (!r.writes.empty()) {
    s += "\nwrites (" + to_string(cfg.operation.mode) + "):\n";
    for (const auto& w : r.writes) {
      s += "  word " + std::to_string(w.spec.word) + ": '" + bits_of(w.before) + "' -> '" +
           w.spec.data + "'  phases " + std::to_string(w.phases) + ", switches " +
           std::to_string(w.switches) + ", time " + sig6(w.duration * 1e9) + " ns, energy " +
           sig6(w.energy * 1e12) + " pJ, peak source " + sig6(w.peak_source_current * 1e6) +
           " uA";
      if (w.sneak_overhead_pct) s += ", sneak overhead " + sig6(*w.sneak_overhead_pct) + " %";
      s += ", worst disturb " + sig6(w.max_disturb_ratio) + " Ic0";
      s += "\n";
    }
    s += "  per-phase energy:\n";
    for (const auto& e : r.trace.events) {
      if (e.kind != TraceEvent::Kind::PhaseEnd || e.label.starts_with("read")) continue;
      s += "    " + e.label + ": " + sig6(e.energy * 1e12) + " pJ over " +
           sig6(e.duration * 1e9) + " ns\n";
    }
  }
  if (!r.reads.empty()) {
    s += "\nreads:\n";
    for (const auto& rd : r.reads) {
      const auto& res = rd.result;
      s += "  word " + std::to_string(rd.word) + ": '" + bits_of(res.bits) + "' in " +
           sig6(res.sense_delay * 1e9) + " ns, max |I|/Ic0 " +
           sig6(res.max_device_current_ratio) + "\n";
      for (std::size_t b = 0; b < res.bits.size(); ++b) {
        const auto& c = res.branch_currents[b];
        s += "    bit " + std::to_string(b) + ": margin " + sig6(res.per_bit_margin[b]) +
             " ohm, I_read_final " + sig6(c.read_final * 1e6) + " uA, I_ref_final " +
             sig6(c.ref_final * 1e6) + " uA\n";
      }
    }
  }
  if (!r.trace.samples.empty()) {
    s += "\ntimeline: " + sig6(r.trace.total_time * 1e9) + " ns, " +
         sig6(r.trace.total_energy * 1e12) + " pJ total\n";
  }
  if (r.sweep) {
    s += "\nsweep (N, M, F2/bit, serial ns, parallel ns):\n";
    for (const auto& row : r.sweep->rows) {
      s += "  " + std::to_string(row.n_bits) + ", " + std::to_string(row.m_words) + ", " +
           sig6(row.area_eq4_f2) + ", " + sig6(row.write_time_ns_serial) + ", " +
           sig6(row.write_time_ns_parallel) + "\n";
    }
  }
  if (r.sensing) {
    const auto& c = *r.sensing;
    s += "\nsensing energy: parallel " + sig6(c.parallel * 1e12) + " pJ, bit-serial " +
         sig6(c.serial * 1e12) + " pJ, saving " + sig6(100.0 * c.saving_ratio) + " %\n";
    s += "  mean saving on '1' bits " + sig6(100.0 * c.mean_saving(true)) + " %, on '0' bits " +
         sig6(100.0 * c.mean_saving(false)) + " %\n";
  }
  if (!r.sneak.empty()) {
    s += "\nwrite source current vs floating bit lines:\n";
    for (const auto& w : r.sneak) {
      s += "  " + std::to_string(w.floating) + " floating: source " + sig6(w.source * 1e6) +
           " uA = main " + sig6(w.main * 1e6) + " + sneak " + sig6(w.sneak * 1e6) + " uA\n";
    }
  }
  if (!r.analysis.empty()) {
    s += "\nanalysis:\n";
    for (const auto& a : r.analysis) s += "  " + a.quantity + " = " + sig6(a.value) + " " + a.unit + "\n";
  }
  return s;
}

std::vector<OutputFile> emit_report(const ScenarioResult& r) {
  std::vector<OutputFile> files;
  switch (r.config.operation.kind) {
    case OperationKind::WriteRead:
      files.push_back({"waveform.csv", waveform_csv(r.trace)});
      files.push_back({"results.csv", write_read_results(r)});
      files.push_back({"reads.csv", reads_csv(r)});
      break;
    case OperationKind::Sweep:
      files.push_back({"results.csv", to_csv(*r.sweep)});
      break;
    case OperationKind::Sensing:
      files.push_back({"results.csv", sensing_csv(*r.sensing)});
      break;
    case OperationKind::Sneak:
      files.push_back({"results.csv", sneak_csv(r.sneak)});
      break;
    case OperationKind::Analyze:
      files.push_back({"results.csv", analysis_csv(r.analysis)});
      break;
  }
  files.push_back({"summary.txt", summary_text(r)});
  return files;
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string tool_version() { return XPOINT_VERSION; }

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& [name, sum] : checksums) files[name] = sum;
  j["files"] = files;
  j["wall_time_s"] = wall_time_s;
  return j.dump(2) + "\n";
}

}  // namespace xpoint
