#include "xpoint/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "xpoint/errors.hpp"

namespace xpoint {

namespace {

template <class S>
struct Field {
  std::string key;
  std::function<void(S&, const YAML::Node&)> read;
  std::function<void(const S&, YAML::Emitter&)> write;
};

std::string scalar_text(const YAML::Node& n) {
  return n.IsScalar() ? "'" + n.Scalar() + "'" : std::string("a non-scalar value");
}

double as_double(const YAML::Node& n) {
  double v = 0.0;
  if (!n.IsScalar() || !YAML::convert<double>::decode(n, v)) {
    throw std::invalid_argument("expected a number, got " + scalar_text(n));
  }
  return v;
}

std::size_t as_count(const YAML::Node& n) {
  long long v = 0;
  if (!n.IsScalar() || !YAML::convert<long long>::decode(n, v)) {
    throw std::invalid_argument("expected an integer, got " + scalar_text(n));
  }
  if (v < 0) throw std::invalid_argument("must be >= 0 (got " + std::to_string(v) + ")");
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> as_counts(const YAML::Node& n) {
  if (!n.IsSequence()) throw std::invalid_argument("expected a list of integers");
  std::vector<std::size_t> out;
  for (const auto& item : n) out.push_back(as_count(item));
  return out;
}

template <class S>
Field<S> real(std::string key, double S::*m) {
  return {std::move(key), [m](S& s, const YAML::Node& n) { s.*m = as_double(n); },
          [m](const S& s, YAML::Emitter& e) { e << format_double(s.*m); }};
}

// A number, or null for "unset".
template <class S>
Field<S> optional_real(std::string key, std::optional<double> S::*m) {
  return {std::move(key),
          [m](S& s, const YAML::Node& n) {
            if (n.IsNull()) {
              (s.*m).reset();
            } else {
              s.*m = as_double(n);
            }
          },
          [m](const S& s, YAML::Emitter& e) {
            if (s.*m) {
              e << format_double(*(s.*m));
            } else {
              e << YAML::Null;
            }
          }};
}

template <class S>
Field<S> count(std::string key, std::size_t S::*m) {
  return {std::move(key), [m](S& s, const YAML::Node& n) { s.*m = as_count(n); },
          [m](const S& s, YAML::Emitter& e) { e << s.*m; }};
}

template <class S>
Field<S> counts(std::string key, std::vector<std::size_t> S::*m) {
  return {std::move(key), [m](S& s, const YAML::Node& n) { s.*m = as_counts(n); },
          [m](const S& s, YAML::Emitter& e) {
            e << YAML::Flow << YAML::BeginSeq;
            for (auto v : s.*m) e << v;
            e << YAML::EndSeq;
          }};
}

template <class S>
Field<S> flag(std::string key, bool S::*m) {
  return {std::move(key),
          [m](S& s, const YAML::Node& n) {
            bool v = false;
            if (!n.IsScalar() || !YAML::convert<bool>::decode(n, v))
              throw std::invalid_argument("expected true or false, got " + scalar_text(n));
            s.*m = v;
          },
          [m](const S& s, YAML::Emitter& e) { e << (s.*m ? "true" : "false"); }};
}

template <class S, class E>
Field<S> choice(std::string key, E S::*m, std::vector<std::pair<std::string, E>> names) {
  return {std::move(key),
          [m, names](S& s, const YAML::Node& n) {
            const std::string text = n.IsScalar() ? n.Scalar() : "";
            for (const auto& [name, value] : names) {
              if (name == text) {
                s.*m = value;
                return;
              }
            }
            std::string allowed;
            for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + name;
            throw std::invalid_argument("expected one of " + allowed + ", got " + scalar_text(n));
          },
          [m, names](const S& s, YAML::Emitter& e) {
            for (const auto& [name, value] : names)
              if (value == s.*m) e << name;
          }};
}

const std::vector<Field<MtjParams>>& device_fields() {
  static const std::vector<Field<MtjParams>> f = {
      real("tox_nm", &MtjParams::tox_nm),
      real("surface_nm2", &MtjParams::surface_nm2),
      real("ra_ohm_um2", &MtjParams::ra_ohm_um2),
      real("tmr", &MtjParams::tmr),
      real("jc_a_per_cm2", &MtjParams::jc_a_per_cm2),
      real("phi_bar_ev", &MtjParams::phi_bar_ev),
      real("k_factor", &MtjParams::k_factor),
      real("t_free_nm", &MtjParams::t_free_nm),
      real("ms_a_per_m", &MtjParams::ms_a_per_m),
      real("temperature_k", &MtjParams::temperature_k),
      // Convenience input for circular junctions; serialized as surface_nm2.
      {"diameter_nm",
       [](MtjParams& p, const YAML::Node& n) {
         const double d = as_double(n);
         if (!(d > 0.0)) throw std::invalid_argument("must be positive");
         p.surface_nm2 = MtjParams::circular_surface(d);
       },
       nullptr},
  };
  return f;
}

const std::vector<Field<SwitchingParams>>& dynamics_fields() {
  static const std::vector<Field<SwitchingParams>> f = {
      choice<SwitchingParams, DynamicsModel>("model", &SwitchingParams::model,
                                             {{"calibrated", DynamicsModel::Calibrated},
                                              {"physical", DynamicsModel::Physical},
                                              {"lumped", DynamicsModel::Lumped}}),
      real("euler_c", &SwitchingParams::euler_c),
      real("xi", &SwitchingParams::xi),
      real("polarization", &SwitchingParams::polarization),
      optional_real("magnetic_moment_a_m2", &SwitchingParams::magnetic_moment),
      real("prefactor_per_a_s", &SwitchingParams::prefactor),
      real("calibration_ratio", &SwitchingParams::calibration_ratio),
      real("calibration_delay_s", &SwitchingParams::calibration_delay_s),
  };
  return f;
}

const std::vector<Field<TransistorModel>>& transistor_fields() {
  static const std::vector<Field<TransistorModel>> f = {
      real("r_on_ohm", &TransistorModel::r_on),
      real("i_sat_a", &TransistorModel::i_sat),
      real("r_off_ohm", &TransistorModel::r_off),
      real("width_f2", &TransistorModel::width_f2),
  };
  return f;
}

const std::vector<Field<ArrayConfig>>& array_fields() {
  static const std::vector<Field<ArrayConfig>> f = {
      count("n_bits", &ArrayConfig::n_bits),
      count("m_words", &ArrayConfig::m_words),
      choice<ArrayConfig, Layout>("layout", &ArrayConfig::layout,
                                  {{"balanced", Layout::Balanced}, {"plain", Layout::Plain}}),
      real("line_resistance_ohm", &ArrayConfig::line_resistance_ohm),
  };
  return f;
}

template <double TransistorModel::*M>
Field<DriveConfig> driver_field(std::string key) {
  return {std::move(key), [](DriveConfig& d, const YAML::Node& n) { d.bit_driver.*M = as_double(n); },
          [](const DriveConfig& d, YAML::Emitter& e) { e << format_double(d.bit_driver.*M); }};
}

const std::vector<Field<DriveConfig>>& drive_fields() {
  static const std::vector<Field<DriveConfig>> f = {
      real("v_dd", &DriveConfig::v_dd),
      real("v_read", &DriveConfig::v_read),
      real("parallel_ratio", &DriveConfig::parallel_ratio),
      real("serial_ratio", &DriveConfig::serial_ratio),
      optional_real("disturb_margin", &DriveConfig::disturb_margin),
      optional_real("dt_s", &DriveConfig::dt),
      real("c_load_f", &DriveConfig::c_load),
      real("setup_s", &DriveConfig::setup_time),
      real("read_pulse_s", &DriveConfig::read_pulse),
      driver_field<&TransistorModel::r_on>("bit_driver_r_on_ohm"),
      driver_field<&TransistorModel::i_sat>("bit_driver_i_sat_a"),
      driver_field<&TransistorModel::r_off>("bit_driver_r_off_ohm"),
      driver_field<&TransistorModel::width_f2>("bit_driver_width_f2"),
  };
  return f;
}

const std::vector<Field<AreaConfig>>& architecture_fields() {
  static const std::vector<Field<AreaConfig>> f = {
      real("a_sa_f2", &AreaConfig::a_sa_f2),
      real("a_write_f2", &AreaConfig::a_write_f2),
      real("a_se_f2", &AreaConfig::a_se_f2),
      real("f_feature_nm", &AreaConfig::f_feature_nm),
      real("f_m_nm", &AreaConfig::f_m_nm),
      real("f_data_hz", &AreaConfig::f_data_hz),
      flag("data_rows_only", &AreaConfig::data_rows_only),
  };
  return f;
}

const std::vector<Field<OperationConfig>>& operation_fields() {
  using O = OperationConfig;
  static const std::vector<Field<O>> f = {
      choice<O, OperationKind>("kind", &O::kind,
                               {{"write_read", OperationKind::WriteRead},
                                {"sweep", OperationKind::Sweep},
                                {"sensing", OperationKind::Sensing},
                                {"sneak", OperationKind::Sneak},
                                {"analyze", OperationKind::Analyze}}),
      choice<O, WriteMode>("mode", &O::mode,
                           {{"parallel", WriteMode::Parallel},
                            {"serial", WriteMode::Serial},
                            {"self_enable_serial", WriteMode::SelfEnableSerial},
                            {"self_enable_parallel", WriteMode::SelfEnableParallel}}),
      choice<O, InitialState>("initial", &O::initial,
                              {{"all_p", InitialState::AllP},
                               {"all_ap", InitialState::AllAp},
                               {"random", InitialState::Random}}),
      {"writes",
       [](O& o, const YAML::Node& n) {
         if (!n.IsSequence()) throw std::invalid_argument("expected a list of {word, data} maps");
         o.writes.clear();
         for (std::size_t i = 0; i < n.size(); ++i) {
           const YAML::Node item = n[i];
           const std::string where = "writes[" + std::to_string(i) + "]";
           if (!item.IsMap()) throw std::invalid_argument(where + ": expected a map");
           WriteSpec w;
           bool has_word = false;
           bool has_data = false;
           for (const auto& kv : item) {
             const std::string k = kv.first.Scalar();
             if (k == "word") {
               w.word = as_count(kv.second);
               has_word = true;
             } else if (k == "data") {
               w.data = kv.second.Scalar();
               has_data = true;
             } else {
               throw std::invalid_argument(where + ": unknown key '" + k + "'");
             }
           }
           if (!has_word || !has_data)
             throw std::invalid_argument(where + ": needs both 'word' and 'data'");
           o.writes.push_back(w);
         }
       },
       [](const O& o, YAML::Emitter& e) {
         e << YAML::BeginSeq;
         for (const auto& w : o.writes) {
           e << YAML::Flow << YAML::BeginMap << YAML::Key << "word" << YAML::Value << w.word
             << YAML::Key << "data" << YAML::Value << YAML::DoubleQuoted << w.data << YAML::EndMap;
         }
         e << YAML::EndSeq;
       }},
      counts("reads", &O::reads),
      choice<O, ReadScheme>("read_scheme", &O::read_scheme,
                            {{"parallel", ReadScheme::Parallel}, {"bit_serial", ReadScheme::BitSerial}}),
      counts("sweep_n_bits", &O::sweep_n_bits),
      counts("sweep_m_words", &O::sweep_m_words),
      count("word", &O::word),
      count("bit", &O::bit),
      {"seed",
       [](O& o, const YAML::Node& n) {
         unsigned long long v = 0;
         if (!n.IsScalar() || n.Scalar().starts_with('-') ||
             !YAML::convert<unsigned long long>::decode(n, v))
           throw std::invalid_argument("expected a non-negative integer, got " + scalar_text(n));
         o.seed = v;
       },
       [](const O& o, YAML::Emitter& e) { e << static_cast<unsigned long long>(o.seed); }},
  };
  return f;
}

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

struct Collector {
  std::vector<std::string> errors;
  std::map<std::string, int> field_lines;

  void add(int line, const std::string& msg) {
    errors.push_back(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg);
  }
  // Attributes a validation message to the line of the field it names.
  void add_validation(const std::string& msg) {
    int line = 0;
    std::size_t best = 0;
    for (const auto& [field, l] : field_lines) {
      if (field.size() > best && msg.find(field) != std::string::npos) {
        best = field.size();
        line = l;
      }
    }
    add(line, msg);
  }
};

template <class S, class V>
void read_section(const YAML::Node& node, const std::string& name, S& target,
                  const std::vector<Field<S>>& fields, V validator, Collector& c) {
  if (!node.IsMap()) {
    c.add(line_of(node), name + ": expected a map of settings");
    return;
  }
  const std::size_t before = c.errors.size();
  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    const std::string path = name + "." + key;
    const auto it = std::find_if(fields.begin(), fields.end(),
                                 [&](const Field<S>& f) { return f.key == key; });
    if (it == fields.end()) {
      c.add(line_of(kv.first), "unknown key '" + path + "'");
      continue;
    }
    c.field_lines[path] = line_of(kv.second);
    try {
      it->read(target, kv.second);
    } catch (const std::exception& e) {
      c.add(line_of(kv.second), path + ": " + e.what());
      continue;
    }
    // Check the field on its own so several bad values are all reported.
    S probe{};
    try {
      it->read(probe, kv.second);
      validator(probe);
    } catch (const ParameterError& e) {
      c.add(line_of(kv.second), e.what());
    } catch (const std::exception&) {
    }
  }
  if (c.errors.size() == before) {
    try {
      validator(target);
    } catch (const ParameterError& e) {
      c.add_validation(e.what());
    }
  }
}

void validate_array(const ArrayConfig& a) {
  if (a.n_bits < 1) throw ParameterError("array.n_bits must be >= 1");
  if (a.m_words < 1) throw ParameterError("array.m_words must be >= 1");
  if (a.layout == Layout::Balanced && a.m_words % 2 != 0) {
    throw ParameterError("array.m_words must be even for the balanced layout (got " +
                         std::to_string(a.m_words) + ")");
  }
  if (!(a.line_resistance_ohm >= 0.0) || !std::isfinite(a.line_resistance_ohm)) {
    throw ParameterError("array.line_resistance_ohm must be >= 0");
  }
}

void validate_area(const AreaConfig& a) {
  ArchitectureConfig c;
  c.a_sa = a.a_sa_f2;
  c.a_write = a.a_write_f2;
  c.a_se = a.a_se_f2;
  c.f_feature_nm = a.f_feature_nm;
  c.f_m_nm = a.f_m_nm;
  c.f_data_hz = a.f_data_hz;
  validate(c);
}

void validate_operation(const OperationConfig&) {}

void validate_into(const ScenarioConfig& cfg, Collector& c) {
  const auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const ParameterError& e) {
      c.add_validation(e.what());
    }
  };
  check([&] { validate(cfg.device); });
  check([&] { validate(cfg.dynamics); });
  check([&] { switching_prefactor(cfg.device, cfg.dynamics); });
  check([&] { validate(cfg.transistor); });
  check([&] { validate_array(cfg.array); });
  check([&] { validate(cfg.drive); });
  check([&] { validate_area(cfg.architecture); });

  const auto& op = cfg.operation;
  const auto& a = cfg.array;
  const auto line = [&](const std::string& f) {
    const auto it = c.field_lines.find(f);
    return it == c.field_lines.end() ? 0 : it->second;
  };
  for (std::size_t i = 0; i < op.writes.size(); ++i) {
    const auto& w = op.writes[i];
    const std::string where = "operation.writes[" + std::to_string(i) + "]";
    if (w.word >= a.m_words) {
      c.add(line("operation.writes"), where + ".word " + std::to_string(w.word) +
                                          " out of range (array.m_words=" +
                                          std::to_string(a.m_words) + ")");
    }
    if (w.data.size() != a.n_bits ||
        w.data.find_first_not_of("01") != std::string::npos) {
      c.add(line("operation.writes"), where + ".data '" + w.data + "' must be " +
                                          std::to_string(a.n_bits) + " characters of 0/1");
    }
  }
  for (std::size_t r : op.reads) {
    if (r >= a.m_words) {
      c.add(line("operation.reads"), "operation.reads: word " + std::to_string(r) +
                                         " out of range (array.m_words=" +
                                         std::to_string(a.m_words) + ")");
    }
  }
  const bool needs_reference = !op.reads.empty() || op.kind == OperationKind::Sensing ||
                               op.mode == WriteMode::SelfEnableSerial ||
                               op.mode == WriteMode::SelfEnableParallel;
  if (op.kind == OperationKind::WriteRead && needs_reference && a.layout != Layout::Balanced) {
    c.add(line("array.layout"), "array.layout: reads and self-enable writes need the balanced layout");
  }
  if (op.kind == OperationKind::Sweep) {
    if (op.sweep_n_bits.empty())
      c.add(line("operation.sweep_n_bits"), "operation.sweep_n_bits must be non-empty");
    if (op.sweep_m_words.empty())
      c.add(line("operation.sweep_m_words"), "operation.sweep_m_words must be non-empty");
    for (auto v : op.sweep_n_bits)
      if (v < 1) c.add(line("operation.sweep_n_bits"), "operation.sweep_n_bits entries must be >= 1");
    for (auto v : op.sweep_m_words)
      if (v < 1) c.add(line("operation.sweep_m_words"), "operation.sweep_m_words entries must be >= 1");
  }
  if (op.kind == OperationKind::Sensing || op.kind == OperationKind::Sneak) {
    if (op.word >= a.m_words)
      c.add(line("operation.word"), "operation.word " + std::to_string(op.word) + " out of range");
    if (op.bit >= a.n_bits)
      c.add(line("operation.bit"), "operation.bit " + std::to_string(op.bit) + " out of range");
    if (a.layout != Layout::Balanced)
      c.add(line("array.layout"), "array.layout: sensing and sneak studies need the balanced layout");
  }
}

template <class S>
void emit_section(YAML::Emitter& e, const std::string& name, const S& value,
                  const std::vector<Field<S>>& fields) {
  e << YAML::Key << name << YAML::Value << YAML::BeginMap;
  for (const auto& f : fields) {
    if (!f.write) continue;
    e << YAML::Key << f.key << YAML::Value;
    f.write(value, e);
  }
  e << YAML::EndMap;
}

}  // namespace

std::string to_string(OperationKind k) {
  switch (k) {
    case OperationKind::WriteRead: return "write_read";
    case OperationKind::Sweep: return "sweep";
    case OperationKind::Sensing: return "sensing";
    case OperationKind::Sneak: return "sneak";
    case OperationKind::Analyze: return "analyze";
  }
  return "?";
}

std::string to_string(InitialState s) {
  switch (s) {
    case InitialState::AllP: return "all_p";
    case InitialState::AllAp: return "all_ap";
    case InitialState::Random: return "random";
  }
  return "?";
}

namespace {
std::string join_errors(const std::vector<std::string>& errors) {
  std::string s = std::to_string(errors.size()) + " config error(s):";
  for (const auto& e : errors) s += "\n  " + e;
  return s;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

ArchitectureConfig ScenarioConfig::architecture_config() const {
  ArchitectureConfig c;
  c.n_bits = array.n_bits;
  c.m_words = array.m_words;
  c.a_sa = architecture.a_sa_f2;
  c.a_write = architecture.a_write_f2;
  c.a_se = architecture.a_se_f2;
  c.f_feature_nm = architecture.f_feature_nm;
  c.f_m_nm = architecture.f_m_nm;
  c.v_dd = drive.v_dd;
  c.f_data_hz = architecture.f_data_hz;
  c.data_rows_only = architecture.data_rows_only;
  return c;
}

CrossbarArray ScenarioConfig::build_array() const {
  CrossbarArray a =
      array.layout == Layout::Balanced
          ? CrossbarArray::balanced(array.m_words, array.n_bits, device, transistor,
                                    array.line_resistance_ohm)
          : CrossbarArray::plain(array.m_words, array.n_bits, device, transistor,
                                 array.line_resistance_ohm);
  switch (operation.initial) {
    case InitialState::AllP: break;
    case InitialState::AllAp: a.set_all(MtjState::AP); break;
    case InitialState::Random: {
      std::mt19937_64 rng(operation.seed);
      for (std::size_t w = 0; w < array.m_words; ++w)
        for (std::size_t b = 0; b < array.n_bits; ++b)
          a.data(w, b).state = (rng() & 1U) ? MtjState::AP : MtjState::P;
      break;
    }
  }
  return a;
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  Collector c;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError({"line " + std::to_string(e.mark.line + 1) + ": malformed YAML: " + e.msg});
  }
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError({"line 1: top level must be a map of sections"});

  for (const auto& kv : root) {
    const std::string section = kv.first.Scalar();
    const YAML::Node& node = kv.second;
    if (node.IsNull()) continue;
    if (section == "device") {
      read_section(node, section, cfg.device, device_fields(),
                   [](const MtjParams& p) { validate(p); }, c);
    } else if (section == "dynamics") {
      read_section(node, section, cfg.dynamics, dynamics_fields(),
                   [](const SwitchingParams& p) { validate(p); }, c);
    } else if (section == "transistor") {
      read_section(node, section, cfg.transistor, transistor_fields(),
                   [](const TransistorModel& p) { validate(p); }, c);
    } else if (section == "array") {
      read_section(node, section, cfg.array, array_fields(), validate_array, c);
    } else if (section == "drive") {
      read_section(node, section, cfg.drive, drive_fields(),
                   [](const DriveConfig& p) { validate(p); }, c);
    } else if (section == "architecture") {
      read_section(node, section, cfg.architecture, architecture_fields(), validate_area, c);
    } else if (section == "operation") {
      read_section(node, section, cfg.operation, operation_fields(), validate_operation, c);
    } else {
      c.add(line_of(kv.first), "unknown section '" + section + "'");
    }
  }
  if (c.errors.empty()) validate_into(cfg, c);
  if (!c.errors.empty()) throw ConfigError(std::move(c.errors));
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path + ": cannot open config file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const ScenarioConfig& cfg) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  emit_section(e, "device", cfg.device, device_fields());
  emit_section(e, "dynamics", cfg.dynamics, dynamics_fields());
  emit_section(e, "transistor", cfg.transistor, transistor_fields());
  emit_section(e, "array", cfg.array, array_fields());
  emit_section(e, "drive", cfg.drive, drive_fields());
  emit_section(e, "architecture", cfg.architecture, architecture_fields());
  emit_section(e, "operation", cfg.operation, operation_fields());
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

void validate(const ScenarioConfig& cfg) {
  Collector c;
  validate_into(cfg, c);
  if (!c.errors.empty()) throw ConfigError(std::move(c.errors));
}

}  // namespace xpoint
