#include "xpoint/perf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <sstream>
#include <string>
#include <system_error>

#include "xpoint/errors.hpp"

namespace xpoint {

const char* const kPerfCsvHeader =
    "n_bits,m_words,area_eq4_f2,area_eq5_f2,write_time_ns_serial,write_time_ns_parallel,"
    "read_time_ns,write_energy_pj,read_energy_pj";

void validate(const ArchitectureConfig& c) {
  if (c.n_bits < 1) throw ParameterError("array.n_bits must be >= 1");
  if (c.m_words < 1) throw ParameterError("array.m_words must be >= 1");
  const auto pos = [](double v, const char* f) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError(std::string(f) + " must be a positive finite number (got " +
                           std::to_string(v) + ")");
  };
  pos(c.a_sa, "architecture.a_sa_f2");
  pos(c.a_write, "architecture.a_write_f2");
  pos(c.a_se, "architecture.a_se_f2");
  pos(c.f_feature_nm, "architecture.f_feature_nm");
  pos(c.f_m_nm, "architecture.f_m_nm");
  pos(c.v_dd, "drive.v_dd");
  pos(c.f_data_hz, "architecture.f_data_hz");
}

double cell_area(const ArchitectureConfig& c) {
  const double n = static_cast<double>(c.n_bits);
  const double m = static_cast<double>(c.m_words);
  const double selectors = c.data_rows_only ? m : m + 2.0;
  return (n * c.a_sa + n * c.a_write + selectors * c.a_se) / (n * m);
}

double cell_area_asymptotic(std::size_t n_bits, double a_se) {
  if (n_bits < 1) throw ParameterError("n_bits must be >= 1");
  return a_se / static_cast<double>(n_bits);
}

double cell_area_physical_floor(double f_feature_nm, double f_m_nm) {
  if (!(f_feature_nm > 0.0) || !(f_m_nm > 0.0)) {
    throw ParameterError("architecture.f_feature_nm and architecture.f_m_nm must be positive");
  }
  return 4.0 * f_m_nm * f_m_nm / (f_feature_nm * f_feature_nm);
}

double dynamic_energy(const OperationTrace& trace, double v_dd) {
  double q = 0.0;
  const auto& s = trace.samples;
  for (std::size_t k = 1; k < s.size(); ++k)
    q += 0.5 * (s[k].source_current + s[k - 1].source_current) * (s[k].t - s[k - 1].t);
  return v_dd * q;
}

double dynamic_power(double energy, double f_data_hz) { return f_data_hz * energy; }

PerfRow evaluate_point(const ArchitectureConfig& c, const MtjParams& device,
                       const OperatingPoint& op, const TransistorModel& word_transistor) {
  validate(c);
  const double ic0 = critical_current(device);
  const double tau_s = *switching_delay(op.drive.serial_ratio * ic0, device, op.dynamics);
  const double tau_p = *switching_delay(op.drive.parallel_ratio * ic0, device, op.dynamics);
  const double r_mid =
      0.5 * (mtj_resistance(MtjState::P, device) + mtj_resistance(MtjState::AP, device));
  const double r_ref = mtj_resistance(MtjState::P, reference_params(device));

  const double n = static_cast<double>(c.n_bits);
  const double i_w = op.drive.parallel_ratio * ic0;
  const double e_write = n * i_w * i_w * (op.drive.bit_driver.r_on + r_mid + word_transistor.r_on) * tau_p;
  const double v_r = op.drive.v_read;
  const double e_read = n * v_r * v_r * (1.0 / r_mid + 1.0 / r_ref) * op.drive.read_pulse;

  PerfRow row;
  row.n_bits = c.n_bits;
  row.m_words = c.m_words;
  row.area_eq4_f2 = cell_area(c);
  row.area_eq5_f2 = cell_area_asymptotic(c.n_bits, c.a_se);
  row.write_time_ns_serial = n * tau_s * 1e9;
  row.write_time_ns_parallel = 2.0 * tau_p * 1e9;
  row.read_time_ns = (op.drive.setup_time + op.drive.read_pulse) * 1e9;
  row.write_energy_pj = e_write * 1e12;
  row.read_energy_pj = e_read * 1e12;
  return row;
}

PerfReport sweep_area(const ArchitectureConfig& c, const std::vector<std::size_t>& n_range,
                      const std::vector<std::size_t>& m_range, const MtjParams& device,
                      const OperatingPoint& op, const TransistorModel& word_transistor) {
  if (n_range.empty() || m_range.empty()) throw ParameterError("sweep ranges must be non-empty");
  std::vector<std::size_t> ns = n_range;
  std::vector<std::size_t> ms = m_range;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());

  std::vector<std::future<PerfRow>> jobs;
  for (std::size_t n : ns) {
    for (std::size_t m : ms) {
      ArchitectureConfig point = c;
      point.n_bits = n;
      point.m_words = m;
      jobs.push_back(std::async(std::launch::async, [=, &device, &op, &word_transistor] {
        return evaluate_point(point, device, op, word_transistor);
      }));
    }
  }
  PerfReport r;
  for (auto& j : jobs) r.rows.push_back(j.get());
  return r;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const PerfReport& r) {
  std::string out = kPerfCsvHeader;
  out += '\n';
  for (const auto& row : r.rows) {
    out += std::to_string(row.n_bits) + ',' + std::to_string(row.m_words);
    for (double v : {row.area_eq4_f2, row.area_eq5_f2, row.write_time_ns_serial,
                     row.write_time_ns_parallel, row.read_time_ns, row.write_energy_pj,
                     row.read_energy_pj}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParameterError("csv line " + std::to_string(line) + ": cannot parse '" + s + "'");
  }
  return v;
}

}  // namespace

PerfReport parse_perf_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kPerfCsvHeader) {
    throw ParameterError("csv line 1: unexpected header");
  }
  PerfReport r;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) {
      throw ParameterError("csv line " + std::to_string(lineno) + ": expected 9 fields, got " +
                           std::to_string(f.size()));
    }
    PerfRow row;
    row.n_bits = parse_field<std::size_t>(f[0], lineno);
    row.m_words = parse_field<std::size_t>(f[1], lineno);
    double* dst[] = {&row.area_eq4_f2,         &row.area_eq5_f2,   &row.write_time_ns_serial,
                     &row.write_time_ns_parallel, &row.read_time_ns, &row.write_energy_pj,
                     &row.read_energy_pj};
    for (std::size_t k = 0; k < 7; ++k) *dst[k] = parse_field<double>(f[k + 2], lineno);
    r.rows.push_back(row);
  }
  return r;
}

double SensingPowerComparison::mean_saving(bool value) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& b : per_bit) {
    if (b.value != value) continue;
    sum += b.saving;
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

SensingPowerComparison compare_sensing_power(const CrossbarArray& array, std::size_t word,
                                             const OperatingPoint& op) {
  const SenseResult par = read_word(array, word, op, ReadScheme::Parallel);
  const SenseResult ser = read_word(array, word, op, ReadScheme::BitSerial);
  const double v = op.drive.v_read;
  const double t = op.drive.read_pulse;

  SensingPowerComparison out;
  out.parallel = par.trace.total_energy;
  out.serial = ser.trace.total_energy;
  out.saving_ratio = out.serial > 0.0 ? 1.0 - out.parallel / out.serial : 0.0;
  const auto stored = array.read_word_state(word);
  for (std::size_t b = 0; b < array.n_bits(); ++b) {
    BitSensingEnergy e;
    e.bit = b;
    e.value = stored[b];
    const auto& p = par.branch_currents[b];
    const auto& s = ser.branch_currents[b];
    e.parallel = v * (p.read_final + p.ref_final) * t;
    e.serial = v * (s.read_final + s.ref_final) * t;
    e.saving = e.serial > 0.0 ? 1.0 - e.parallel / e.serial : 0.0;
    out.per_bit.push_back(e);
  }
  return out;
}

}  // namespace xpoint
