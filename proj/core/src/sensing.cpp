#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xpoint/errors.hpp"
#include "xpoint/memory_ops.hpp"

namespace xpoint {

SenseDecision sense_bit(double r_data_branch, double r_ref_branch, double c_load, double v_dd) {
  if (!(r_data_branch > 0.0) || !(r_ref_branch > 0.0)) {
    throw ParameterError("sense_bit: branch resistances must be positive");
  }
  if (!(c_load > 0.0) || !(v_dd > 0.0)) {
    throw ParameterError("sense_bit: c_load and v_dd must be positive");
  }
  const double diff = std::abs(r_data_branch - r_ref_branch);
  if (diff <= 1e-6 * std::max(r_data_branch, r_ref_branch)) {
    throw IndeterminateRead("indeterminate read: data branch " + std::to_string(r_data_branch) +
                            " ohm vs reference " + std::to_string(r_ref_branch) + " ohm");
  }
  // Both nodes start at v_dd; the faster branch crosses v_dd/2 first.
  const double r_fast = std::min(r_data_branch, r_ref_branch);
  return {r_data_branch > r_ref_branch, r_fast * c_load * std::numbers::ln2};
}

BiasCondition read_bias(const CrossbarArray& array, std::size_t word, const OperatingPoint& op,
                        std::optional<std::size_t> only_bit) {
  if (array.layout() != Layout::Balanced) {
    throw ParameterError("read: only the balanced layout has reference words");
  }
  BiasCondition bias = select_word(array, word, Phase::Read, op.drive.v_dd);
  for (std::size_t b = 0; b < array.n_bits(); ++b) {
    if (only_bit && *only_bit != b) continue;
    bias.bit_lines[2 * b] = LineBias::voltage(op.drive.v_read);
    bias.bit_lines[2 * b + 1] = LineBias::voltage(op.drive.v_read);
  }
  return bias;
}

namespace {

struct CycleResult {
  std::vector<BranchCurrents> currents;
  double max_ratio = 0.0;
};

CycleResult read_cycle(const CrossbarArray& array, std::size_t word, const OperatingPoint& op,
                       std::optional<std::size_t> only_bit, OperationTrace& trace, double t0) {
  const BiasCondition bias = read_bias(array, word, op, only_bit);
  const Network net = build_network(array, bias);
  const NetworkSolution sol = solve_network(net);

  CycleResult out;
  out.currents.resize(array.n_bits());
  for (std::size_t b = 0; b < array.n_bits(); ++b) {
    if (only_bit && *only_bit != b) continue;
    const std::size_t dl = array.data_bit_line(word, b);
    const std::size_t rl = array.reference_bit_line(word, b);
    const std::size_t rw = array.reference_word_line(word);
    out.currents[b] = {sol.bit_source_currents[dl], sol.bit_source_currents[rl],
                       sol.device_current(word, dl), sol.device_current(rw, rl)};
  }

  WaveformSample idle;
  WaveformSample on;
  for (std::size_t w = 0; w < array.word_lines(); ++w) {
    for (std::size_t l = 0; l < array.bit_lines(); ++l) {
      const auto& c = array.cell(w, l);
      if (!c) continue;
      const double i = sol.device_current(w, l);
      idle.device_currents.push_back(0.0);
      on.device_currents.push_back(i);
      const double ratio = std::abs(i) / critical_current(c->params);
      out.max_ratio = std::max(out.max_ratio, ratio);
      if (ratio >= 1.0) {
        throw ReadDisturb("read disturb: " + array.word_line_label(w) + "/" +
                          array.bit_line_label(l) + " carries " + std::to_string(ratio) +
                          " x Ic0 during read of word " + std::to_string(word));
      }
    }
  }
  on.source_current = sol.supply_current(net);
  on.power = sol.supply_power;

  const double start = t0 + op.drive.setup_time;
  const double end = start + op.drive.read_pulse;
  std::string name = "read WL" + std::to_string(word);
  if (only_bit) name += " bit " + std::to_string(*only_bit);

  const std::size_t first = trace.samples.size();
  for (auto [t, s] : {std::pair{start, &idle}, {start, &on}, {end, &on}, {end, &idle}}) {
    WaveformSample copy = *s;
    copy.t = t;
    trace.samples.push_back(std::move(copy));
  }
  TraceEvent ev{start, TraceEvent::Kind::PhaseStart, name};
  ev.word_line = word;
  ev.current = on.source_current;
  trace.events.push_back(ev);
  ev.t = end;
  ev.kind = TraceEvent::Kind::PhaseEnd;
  ev.energy = integrate_power({trace.samples.begin() + first, trace.samples.end()});
  ev.duration = end - start;
  trace.events.push_back(ev);
  trace.total_time = end;
  trace.total_energy += ev.energy;
  return out;
}

}  // namespace

SenseResult read_word(const CrossbarArray& array, std::size_t word, const OperatingPoint& op,
                      ReadScheme scheme) {
  SenseResult res;
  for (std::size_t w = 0; w < array.word_lines(); ++w)
    for (std::size_t l = 0; l < array.bit_lines(); ++l)
      if (array.cell(w, l))
        res.trace.device_labels.push_back(array.word_line_label(w) + "/" + array.bit_line_label(l));

  res.branch_currents.resize(array.n_bits());
  if (scheme == ReadScheme::Parallel) {
    const CycleResult c = read_cycle(array, word, op, std::nullopt, res.trace, 0.0);
    res.branch_currents = c.currents;
    res.max_device_current_ratio = c.max_ratio;
  } else {
    for (std::size_t b = 0; b < array.n_bits(); ++b) {
      const CycleResult c = read_cycle(array, word, op, b, res.trace, res.trace.total_time);
      res.branch_currents[b] = c.currents[b];
      res.max_device_current_ratio = std::max(res.max_device_current_ratio, c.max_ratio);
    }
  }
  res.sense_delay = res.trace.total_time;

  for (std::size_t b = 0; b < array.n_bits(); ++b) {
    const auto& bc = res.branch_currents[b];
    const double r_data = op.drive.v_read / bc.read_final;
    const double r_ref = op.drive.v_read / bc.ref_final;
    const SenseDecision d = sense_bit(r_data, r_ref, op.drive.c_load, op.drive.v_dd);
    res.bits.push_back(d.bit);
    res.per_bit_margin.push_back(r_ref - r_data);
    res.latch_delay.push_back(d.delay);
  }
  return res;
}

}  // namespace xpoint
