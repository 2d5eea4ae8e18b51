#include "xpoint/memory_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xpoint/errors.hpp"

namespace xpoint {

namespace {

constexpr std::size_t kMaxStepsPerPhase = 2'000'000;

struct DeviceRef {
  std::size_t word_line;
  std::size_t bit_line;
};

std::vector<DeviceRef> device_order(const CrossbarArray& array) {
  std::vector<DeviceRef> out;
  for (std::size_t w = 0; w < array.word_lines(); ++w)
    for (std::size_t b = 0; b < array.bit_lines(); ++b)
      if (array.cell(w, b)) out.push_back({w, b});
  return out;
}

std::string device_label(const CrossbarArray& array, DeviceRef d) {
  return array.word_line_label(d.word_line) + "/" + array.bit_line_label(d.bit_line);
}

std::vector<std::string> device_labels(const CrossbarArray& array) {
  std::vector<std::string> out;
  for (const auto& d : device_order(array)) out.push_back(device_label(array, d));
  return out;
}

WaveformSample make_sample(double t, const Network& net, const NetworkSolution& sol,
                           const std::vector<DeviceRef>& order) {
  WaveformSample s;
  s.t = t;
  s.source_current = sol.supply_current(net);
  s.power = sol.supply_power;
  s.device_currents.reserve(order.size());
  for (const auto& d : order) s.device_currents.push_back(sol.device_current(d.word_line, d.bit_line));
  return s;
}

WaveformSample idle_sample(double t, std::size_t devices) {
  WaveformSample s;
  s.t = t;
  s.device_currents.assign(devices, 0.0);
  return s;
}

double ic0_of(const MtjDevice& d) { return critical_current(d.params); }

struct PhaseSpec {
  std::string name;
  Phase phase = Phase::One;
  std::vector<std::size_t> bits;  // bits of the selected word driven in this phase
  double ratio = 3.0;
};

struct WriteContext {
  CrossbarArray& array;
  std::size_t word;
  const OperatingPoint& op;
  double prefactor;
  double dt;
  std::vector<DeviceRef> order;
};

BiasCondition phase_bias(const WriteContext& ctx, const PhaseSpec& spec, double supply) {
  BiasCondition bias = select_word(ctx.array, ctx.word, spec.phase, supply);
  const double level = spec.phase == Phase::One ? supply : 0.0;
  for (std::size_t b : spec.bits)
    bias.bit_lines[ctx.array.data_bit_line(ctx.word, b)] =
        LineBias::driven(level, ctx.op.drive.bit_driver);
  return bias;
}

bool is_driven(const WriteContext& ctx, const PhaseSpec& spec, DeviceRef d) {
  if (d.word_line != ctx.word) return false;
  return std::any_of(spec.bits.begin(), spec.bits.end(), [&](std::size_t b) {
    return ctx.array.data_bit_line(ctx.word, b) == d.bit_line;
  });
}

double disturb_ratio(const WriteContext& ctx, const PhaseSpec& spec, const NetworkSolution& sol) {
  double worst = 0.0;
  for (const auto& d : ctx.order) {
    if (is_driven(ctx, spec, d)) continue;
    const auto& dev = *ctx.array.cell(d.word_line, d.bit_line);
    const double i = sol.device_current(d.word_line, d.bit_line);
    if (i == 0.0 || driven_state(i) == dev.state) continue;
    worst = std::max(worst, std::abs(i) / ic0_of(dev));
  }
  return worst;
}

// Write supply for a phase: the weakest switching cell gets ratio * Ic0,
// unless a disturb margin is set and that would push another cell past it.
double size_supply(const WriteContext& ctx, const PhaseSpec& spec,
                   const std::vector<std::size_t>& switching, MtjState target) {
  const auto unit = [&](const CrossbarArray& a) { return solve(a, phase_bias(ctx, spec, 1.0)); };

  const NetworkSolution before = unit(ctx.array);
  double v_target = 0.0;
  for (std::size_t b : switching) {
    const std::size_t bl = ctx.array.data_bit_line(ctx.word, b);
    const double i = before.device_current(ctx.word, bl);
    const auto& dev = ctx.array.data(ctx.word, b);
    if (driven_state(i) != target || i == 0.0) {
      throw WriteFailure("write failure: " + device_label(ctx.array, {ctx.word, bl}) +
                         " receives current of the wrong polarity in " + spec.name);
    }
    v_target = std::max(v_target, spec.ratio * ic0_of(dev) / std::abs(i));
  }

  if (!ctx.op.drive.disturb_margin) return v_target;

  CrossbarArray after_array = ctx.array;
  for (std::size_t b : switching) after_array.data(ctx.word, b).state = target;
  const NetworkSolution after = unit(after_array);

  double v_cap = std::numeric_limits<double>::infinity();
  for (const auto& d : ctx.order) {
    if (is_driven(ctx, spec, d)) continue;
    const auto& dev = *ctx.array.cell(d.word_line, d.bit_line);
    for (const auto* sol : {&before, &after}) {
      const double i = sol->device_current(d.word_line, d.bit_line);
      if (i == 0.0 || driven_state(i) == dev.state) continue;
      v_cap = std::min(v_cap, *ctx.op.drive.disturb_margin * ic0_of(dev) / std::abs(i));
    }
  }
  const double v = std::min(v_target, v_cap);
  for (std::size_t b : switching) {
    const std::size_t bl = ctx.array.data_bit_line(ctx.word, b);
    const double i = std::abs(before.device_current(ctx.word, bl)) * v;
    if (!(i > ic0_of(ctx.array.data(ctx.word, b)))) {
      throw WriteFailure("write failure: insufficient drive for " +
                         device_label(ctx.array, {ctx.word, bl}) + " in " + spec.name +
                         ": disturb limit allows only " +
                         std::to_string(i / ic0_of(ctx.array.data(ctx.word, b))) + " x Ic0");
    }
  }
  return v;
}

double run_phase(WriteContext& ctx, const PhaseSpec& spec, OperationTrace& trace, double t0) {
  const MtjState target = spec.phase == Phase::One ? MtjState::AP : MtjState::P;
  const std::size_t ndev = ctx.order.size();
  double t = t0 + ctx.op.drive.setup_time;

  std::vector<std::size_t> switching;
  for (std::size_t b : spec.bits)
    if (ctx.array.data(ctx.word, b).state != target) switching.push_back(b);

  TraceEvent start{t, TraceEvent::Kind::PhaseStart, spec.name};
  start.word_line = ctx.word;
  if (switching.empty()) {
    trace.events.push_back(start);
    TraceEvent end{t, TraceEvent::Kind::PhaseEnd, spec.name};
    end.word_line = ctx.word;
    trace.events.push_back(end);
    return t;
  }

  const double supply = size_supply(ctx, spec, switching, target);
  const BiasCondition bias = phase_bias(ctx, spec, supply);
  Network net = build_network(ctx.array, bias);
  NetworkSolution sol = solve_network(net);

  const std::size_t first_sample = trace.samples.size();
  trace.samples.push_back(idle_sample(t, ndev));
  trace.samples.push_back(make_sample(t, net, sol, ctx.order));
  start.current = trace.samples.back().source_current;
  trace.max_disturb_ratio = std::max(trace.max_disturb_ratio, disturb_ratio(ctx, spec, sol));
  for (std::size_t b : spec.bits)
    start.main_current += std::abs(sol.device_current(ctx.word, ctx.array.data_bit_line(ctx.word, b)));
  trace.events.push_back(start);

  const auto remaining = [&] {
    return std::count_if(switching.begin(), switching.end(), [&](std::size_t b) {
      return ctx.array.data(ctx.word, b).state != target;
    });
  };

  std::size_t steps = 0;
  while (remaining() > 0) {
    // A static network with no cell above threshold will never finish.
    bool progressing = false;
    for (std::size_t b : switching) {
      const auto& dev = ctx.array.data(ctx.word, b);
      if (dev.state == target) continue;
      const double i = sol.device_current(ctx.word, ctx.array.data_bit_line(ctx.word, b));
      if (driven_state(i) == target && std::abs(i) > ic0_of(dev)) progressing = true;
    }
    if (!progressing || ++steps > kMaxStepsPerPhase) {
      for (std::size_t b : switching) {
        if (ctx.array.data(ctx.word, b).state == target) continue;
        const std::size_t bl = ctx.array.data_bit_line(ctx.word, b);
        throw WriteFailure("write failure: " + device_label(ctx.array, {ctx.word, bl}) +
                           " never reaches Ic0 (" +
                           std::to_string(std::abs(sol.device_current(ctx.word, bl)) * 1e6) +
                           " uA) in " + spec.name);
      }
    }

    bool flipped_any = false;
    t += ctx.dt;
    const bool whole_array = ctx.op.drive.disturb_margin.has_value();
    for (const auto& d : ctx.order) {
      if (!whole_array && !is_driven(ctx, spec, d)) continue;
      auto& dev = *ctx.array.cell(d.word_line, d.bit_line);
      const MtjState before = dev.state;
      dev = switching_step(dev, sol.device_current(d.word_line, d.bit_line), ctx.dt, ctx.prefactor);
      if (dev.state == before) continue;
      if (!is_driven(ctx, spec, d)) {
        throw WriteDisturb("write disturb: " + device_label(ctx.array, d) + " flipped to " +
                           std::string(to_string(dev.state)) + " during " + spec.name);
      }
      flipped_any = true;
      TraceEvent ev{t, TraceEvent::Kind::Switch, device_label(ctx.array, d)};
      ev.word_line = d.word_line;
      ev.bit_line = d.bit_line;
      ev.current = sol.device_current(d.word_line, d.bit_line);
      trace.events.push_back(ev);
    }
    trace.samples.push_back(make_sample(t, net, sol, ctx.order));
    if (flipped_any) {
      net = build_network(ctx.array, bias);
      sol = solve_network(net);
      trace.samples.push_back(make_sample(t, net, sol, ctx.order));
      trace.max_disturb_ratio = std::max(trace.max_disturb_ratio, disturb_ratio(ctx, spec, sol));
    }
  }
  trace.samples.push_back(idle_sample(t, ndev));

  const std::vector<WaveformSample> phase_samples(trace.samples.begin() + first_sample,
                                                  trace.samples.end());
  TraceEvent end{t, TraceEvent::Kind::PhaseEnd, spec.name};
  end.word_line = ctx.word;
  end.energy = integrate_power(phase_samples);
  end.duration = t - start.t;
  trace.events.push_back(end);
  return t;
}

void check_request(const CrossbarArray& array, const WriteRequest& req) {
  if (req.word_addr >= array.m_words()) {
    throw ParameterError("write: word address " + std::to_string(req.word_addr) +
                         " out of range (m_words=" + std::to_string(array.m_words()) + ")");
  }
  if (req.data.size() != array.n_bits()) {
    throw ParameterError("write: data length " + std::to_string(req.data.size()) +
                         " != n_bits " + std::to_string(array.n_bits()));
  }
}

OperationTrace run_phases(CrossbarArray& array, const WriteRequest& req, const OperatingPoint& op,
                          const std::vector<PhaseSpec>& phases, bool parallel) {
  WriteContext ctx{array, req.word_addr, op,
                   switching_prefactor(array.data_params(), op.dynamics),
                   op.drive.dt.value_or(nominal_switching_delay(array, op, parallel) / 100.0),
                   device_order(array)};
  OperationTrace trace;
  trace.device_labels = device_labels(array);
  double t = 0.0;
  for (const auto& spec : phases) t = run_phase(ctx, spec, trace, t);
  trace.total_time = t;
  for (const auto& e : trace.events)
    if (e.kind == TraceEvent::Kind::PhaseEnd) trace.total_energy += e.energy;
  return trace;
}

std::vector<PhaseSpec> parallel_phases(const WriteRequest& req, const std::vector<bool>& stored,
                                       bool only_changed, double ratio) {
  std::vector<PhaseSpec> out;
  for (const Phase ph : {Phase::Zero, Phase::One}) {
    PhaseSpec spec;
    spec.phase = ph;
    spec.ratio = ratio;
    spec.name = std::string("phase '") + (ph == Phase::One ? "1" : "0") + "' WL" +
                std::to_string(req.word_addr);
    const bool value = ph == Phase::One;
    for (std::size_t b = 0; b < req.data.size(); ++b) {
      if (req.data[b] != value) continue;
      if (only_changed && stored[b] == value) continue;
      spec.bits.push_back(b);
    }
    if (!spec.bits.empty()) out.push_back(std::move(spec));
  }
  return out;
}

std::vector<PhaseSpec> serial_phases(const WriteRequest& req, const std::vector<bool>& stored,
                                     bool only_changed, double ratio) {
  std::vector<PhaseSpec> out;
  for (std::size_t b = 0; b < req.data.size(); ++b) {
    if (only_changed && stored[b] == req.data[b]) continue;
    PhaseSpec spec;
    spec.phase = req.data[b] ? Phase::One : Phase::Zero;
    spec.ratio = ratio;
    spec.bits = {b};
    spec.name = "bit " + std::to_string(b) + " <- '" + (req.data[b] ? "1" : "0") + "' WL" +
                std::to_string(req.word_addr);
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace

void validate(const DriveConfig& d) {
  const auto pos = [](double v, const char* f) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError(std::string(f) + " must be a positive finite number (got " +
                           std::to_string(v) + ")");
  };
  pos(d.v_dd, "drive.v_dd");
  pos(d.v_read, "drive.v_read");
  if (!(d.parallel_ratio > 1.0)) throw ParameterError("drive.parallel_ratio must exceed 1");
  if (!(d.serial_ratio > 1.0)) throw ParameterError("drive.serial_ratio must exceed 1");
  if (d.disturb_margin && !(*d.disturb_margin > 0.0 && *d.disturb_margin <= 1.0))
    throw ParameterError("drive.disturb_margin must lie in (0, 1]");
  if (d.dt) pos(*d.dt, "drive.dt_s");
  pos(d.c_load, "drive.c_load_f");
  if (!(d.setup_time >= 0.0)) throw ParameterError("drive.setup_s must be >= 0");
  pos(d.read_pulse, "drive.read_pulse_s");
  validate(d.bit_driver);
}

std::string to_string(WriteMode m) {
  switch (m) {
    case WriteMode::Parallel: return "parallel";
    case WriteMode::Serial: return "serial";
    case WriteMode::SelfEnableSerial: return "self_enable_serial";
    case WriteMode::SelfEnableParallel: return "self_enable_parallel";
  }
  return "?";
}

std::optional<WriteMode> parse_write_mode(const std::string& s) {
  for (const auto m : {WriteMode::Parallel, WriteMode::Serial, WriteMode::SelfEnableSerial,
                       WriteMode::SelfEnableParallel})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::vector<bool> parse_bits(const std::string& s) {
  std::vector<bool> out;
  for (char c : s) {
    if (c == '0' || c == '1') {
      out.push_back(c == '1');
    } else {
      throw ParameterError("bit pattern '" + s + "' may only contain '0' and '1'");
    }
  }
  return out;
}

std::string format_bits(const std::vector<bool>& bits) {
  std::string s;
  for (bool b : bits) s += b ? '1' : '0';
  return s;
}

std::size_t OperationTrace::count(TraceEvent::Kind k) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [k](const TraceEvent& e) { return e.kind == k; }));
}

double OperationTrace::max_source_current() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.source_current);
  return m;
}

void OperationTrace::append(const OperationTrace& other) {
  const double offset = total_time;
  if (device_labels.empty()) device_labels = other.device_labels;
  for (auto e : other.events) {
    e.t += offset;
    events.push_back(std::move(e));
  }
  for (auto s : other.samples) {
    s.t += offset;
    samples.push_back(std::move(s));
  }
  total_time += other.total_time;
  total_energy += other.total_energy;
  max_disturb_ratio = std::max(max_disturb_ratio, other.max_disturb_ratio);
}

double integrate_power(const std::vector<WaveformSample>& samples) {
  double e = 0.0;
  for (std::size_t k = 1; k < samples.size(); ++k)
    e += 0.5 * (samples[k].power + samples[k - 1].power) * (samples[k].t - samples[k - 1].t);
  return e;
}

BiasCondition select_word(const CrossbarArray& array, std::size_t word, Phase phase,
                          double supply) {
  if (word >= array.m_words()) {
    throw ParameterError("select_word: word address " + std::to_string(word) + " out of range");
  }
  BiasCondition bias = BiasCondition::all_floating(array);
  bias.pmos_rail = supply;
  switch (phase) {
    case Phase::Zero:
      bias.gates[word].pmos = Gate::On;
      break;
    case Phase::One:
      bias.gates[word].nmos = Gate::On;
      break;
    case Phase::Read:
      bias.gates[word].nmos = Gate::On;
      if (array.layout() == Layout::Balanced) bias.gates[array.reference_word_line(word)].nmos = Gate::On;
      break;
  }
  return bias;
}

double nominal_switching_delay(const CrossbarArray& array, const OperatingPoint& op,
                               bool parallel) {
  const MtjParams& p = array.data_params();
  const double ratio = parallel ? op.drive.parallel_ratio : op.drive.serial_ratio;
  return *switching_delay(ratio * critical_current(p), p, op.dynamics);
}

OperationTrace write_word_parallel(CrossbarArray& array, const WriteRequest& req,
                                   const OperatingPoint& op) {
  check_request(array, req);
  const auto stored = array.read_word_state(req.word_addr);
  const bool only_changed = req.mode == WriteMode::SelfEnableParallel;
  return run_phases(array, req, op,
                    parallel_phases(req, stored, only_changed, op.drive.parallel_ratio), true);
}

OperationTrace write_word_serial(CrossbarArray& array, const WriteRequest& req,
                                 const OperatingPoint& op) {
  check_request(array, req);
  const auto stored = array.read_word_state(req.word_addr);
  const bool only_changed = req.mode == WriteMode::SelfEnableSerial;
  return run_phases(array, req, op, serial_phases(req, stored, only_changed, op.drive.serial_ratio),
                    false);
}

OperationTrace write_self_enable(CrossbarArray& array, const WriteRequest& req,
                                 const OperatingPoint& op) {
  check_request(array, req);
  // The comparison needs the stored word; it costs one sense cycle.
  SenseResult stored = read_word(array, req.word_addr, op);
  OperationTrace trace = stored.trace;
  WriteRequest inner = req;
  std::vector<bool> current = stored.bits;
  const bool parallel = req.mode == WriteMode::SelfEnableParallel;
  inner.mode = parallel ? WriteMode::SelfEnableParallel : WriteMode::SelfEnableSerial;
  const auto phases = parallel
                          ? parallel_phases(inner, current, true, op.drive.parallel_ratio)
                          : serial_phases(inner, current, true, op.drive.serial_ratio);
  trace.append(run_phases(array, inner, op, phases, parallel));
  return trace;
}

OperationTrace write_word(CrossbarArray& array, const WriteRequest& req, const OperatingPoint& op) {
  switch (req.mode) {
    case WriteMode::Parallel: return write_word_parallel(array, req, op);
    case WriteMode::Serial: return write_word_serial(array, req, op);
    case WriteMode::SelfEnableSerial:
    case WriteMode::SelfEnableParallel: return write_self_enable(array, req, op);
  }
  return {};
}

double nominal_write_supply(const CrossbarArray& array, const OperatingPoint& op) {
  const MtjParams& p = array.data_params();
  const auto& drv = array.drivers(0);
  const double r_word = drv ? drv->nmos.r_on : 0.0;
  return op.drive.parallel_ratio * critical_current(p) *
         (op.drive.bit_driver.r_on + mtj_resistance(MtjState::P, p) + r_word);
}

std::vector<WriteSourceCurrent> write_source_currents(const CrossbarArray& array,
                                                      std::size_t word, std::size_t bit,
                                                      const OperatingPoint& op) {
  const double supply = nominal_write_supply(array, op);
  std::vector<std::size_t> others;
  for (std::size_t b = 0; b < array.n_bits(); ++b)
    if (b != bit) others.push_back(b);
  const std::size_t line = array.data_bit_line(word, bit);

  std::vector<WriteSourceCurrent> out;
  for (std::size_t k = 0; k <= others.size(); ++k) {
    BiasCondition bias = select_word(array, word, Phase::One, supply);
    bias.bit_lines[line] = LineBias::driven(supply, op.drive.bit_driver);
    // The last k of the other bits float, the rest are written alongside.
    for (std::size_t j = 0; j + k < others.size(); ++j)
      bias.bit_lines[array.data_bit_line(word, others[j])] =
          LineBias::driven(supply, op.drive.bit_driver);
    const NetworkSolution sol = solve(array, bias);
    const SneakBreakdown br = sneak_decomposition(sol, array, word, line);
    out.push_back({k, br.source, br.main, br.sneak_sum});
  }
  return out;
}

}  // namespace xpoint
