#include "xpoint/device.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xpoint/errors.hpp"

namespace xpoint {

namespace {

constexpr double kNm2PerUm2 = 1e6;
constexpr double kCm2PerNm2 = 1e-14;
constexpr double kAngstromPerNm = 10.0;
// Brinkman exponent coefficient, 1/(Å·eV^1/2).
constexpr double kBrinkmanExponent = 1.025;
// Progress is a sum of dt/tau terms; allow for accumulated rounding.
constexpr double kProgressSlack = 1e-12;

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(field) + " must be a positive finite number (got " +
                         std::to_string(v) + ")");
  }
}

}  // namespace

void validate(const MtjParams& p) {
  require_positive(p.tox_nm, "device.tox_nm");
  require_positive(p.surface_nm2, "device.surface_nm2");
  require_positive(p.ra_ohm_um2, "device.ra_ohm_um2");
  if (!(p.tmr >= 0.0) || !std::isfinite(p.tmr)) {
    throw ParameterError("device.tmr must be >= 0 (got " + std::to_string(p.tmr) + ")");
  }
  require_positive(p.jc_a_per_cm2, "device.jc_a_per_cm2");
  require_positive(p.phi_bar_ev, "device.phi_bar_ev");
  require_positive(p.k_factor, "device.k_factor");
  require_positive(p.t_free_nm, "device.t_free_nm");
  require_positive(p.ms_a_per_m, "device.ms_a_per_m");
  require_positive(p.temperature_k, "device.temperature_k");
}

void validate(const SwitchingParams& s) {
  switch (s.model) {
    case DynamicsModel::Physical:
      require_positive(s.xi, "dynamics.xi");
      if (!(s.polarization > 0.0 && s.polarization < 1.0)) {
        throw ParameterError("dynamics.polarization must lie in (0, 1) (got " +
                             std::to_string(s.polarization) + ")");
      }
      if (s.magnetic_moment) require_positive(*s.magnetic_moment, "dynamics.magnetic_moment");
      break;
    case DynamicsModel::Lumped:
      require_positive(s.prefactor, "dynamics.prefactor");
      break;
    case DynamicsModel::Calibrated:
      if (!(s.calibration_ratio > 1.0)) {
        throw ParameterError("dynamics.calibration_ratio must exceed 1 (got " +
                             std::to_string(s.calibration_ratio) + ")");
      }
      require_positive(s.calibration_delay_s, "dynamics.calibration_delay_ns");
      break;
  }
}

void validate(const TransistorModel& t) {
  require_positive(t.r_on, "transistor.r_on");
  require_positive(t.i_sat, "transistor.i_sat");
  require_positive(t.r_off, "transistor.r_off");
  require_positive(t.width_f2, "transistor.width_f2");
  if (!(t.r_off > t.r_on)) throw ParameterError("transistor.r_off must exceed transistor.r_on");
}

std::string_view to_string(MtjState s) { return s == MtjState::P ? "P" : "AP"; }

double mtj_resistance(MtjState state, const MtjParams& p) {
  require_positive(p.surface_nm2, "device.surface_nm2");
  const double r_p = p.ra_ohm_um2 * kNm2PerUm2 / p.surface_nm2;
  return state == MtjState::P ? r_p : r_p * (1.0 + p.tmr);
}

double brinkman_raw(double tox_nm, double surface_nm2, double phi_bar_ev, double k_factor) {
  require_positive(tox_nm, "tox");
  require_positive(surface_nm2, "surface");
  const double tox_a = tox_nm * kAngstromPerNm;
  const double sqrt_phi = std::sqrt(phi_bar_ev);
  const double surface_um2 = surface_nm2 / kNm2PerUm2;
  return tox_a / (k_factor * sqrt_phi * surface_um2) *
         std::exp(kBrinkmanExponent * tox_a * sqrt_phi);
}

double brinkman_resistance(double tox_nm, double surface_nm2, const MtjParams& p) {
  validate(p);
  const double anchor = p.ra_ohm_um2 * kNm2PerUm2 / p.surface_nm2;
  const double scale = brinkman_raw(tox_nm, surface_nm2, p.phi_bar_ev, p.k_factor) /
                       brinkman_raw(p.tox_nm, p.surface_nm2, p.phi_bar_ev, p.k_factor);
  return anchor * scale;
}

double reference_surface(const MtjParams& p) {
  validate(p);
  const double r_p = mtj_resistance(MtjState::P, p);
  const double r_ref = 0.5 * (r_p + mtj_resistance(MtjState::AP, p));
  return p.surface_nm2 * r_p / r_ref;
}

MtjParams reference_params(const MtjParams& p) {
  MtjParams ref = p;
  ref.surface_nm2 = reference_surface(p);
  return ref;
}

double critical_current(const MtjParams& p) {
  require_positive(p.surface_nm2, "device.surface_nm2");
  return p.jc_a_per_cm2 * p.surface_nm2 * kCm2PerNm2;
}

double free_layer_moment(const MtjParams& p) {
  const double volume_m3 = p.surface_nm2 * 1e-18 * p.t_free_nm * 1e-9;
  return p.ms_a_per_m * volume_m3;
}

double switching_prefactor(const MtjParams& p, const SwitchingParams& s) {
  validate(s);
  switch (s.model) {
    case DynamicsModel::Lumped:
      return s.prefactor;
    case DynamicsModel::Calibrated:
      return 1.0 / (s.calibration_delay_s * (s.calibration_ratio - 1.0) * critical_current(p));
    case DynamicsModel::Physical: {
      const double denom =
          s.euler_c + std::log(std::numbers::pi * std::numbers::pi * s.xi / 4.0);
      if (!(denom > 0.0)) {
        throw ParameterError("dynamics.xi gives C + ln(pi^2 xi / 4) <= 0; no finite delay");
      }
      const double m = s.magnetic_moment.value_or(free_layer_moment(p));
      const double pol = s.polarization;
      return (2.0 / denom) * phys::kBohrMagneton * pol /
             (phys::kElementaryCharge * m * (1.0 + pol * pol));
    }
  }
  return 0.0;
}

std::optional<double> switching_delay_with(double i_write, double ic0, double prefactor) {
  const double overdrive = std::abs(i_write) - ic0;
  if (!(overdrive > 0.0)) return std::nullopt;
  return 1.0 / (prefactor * overdrive);
}

std::optional<double> switching_delay(double i_write, const MtjParams& p,
                                      const SwitchingParams& s) {
  if (i_write < 0.0) throw ParameterError("switching_delay: i_write must be >= 0");
  return switching_delay_with(i_write, critical_current(p), switching_prefactor(p, s));
}

MtjDevice switching_step(MtjDevice device, double current, double dt, double prefactor) {
  if (!(dt > 0.0)) throw ParameterError("switching_step: dt must be positive");
  if (driven_state(current) == device.state) return device;
  const auto tau = switching_delay_with(current, critical_current(device.params), prefactor);
  if (!tau) return device;
  device.progress += dt / *tau;
  if (device.progress >= 1.0 - kProgressSlack) {
    device.state = flipped(device.state);
    device.progress = 0.0;
  }
  return device;
}

MtjDevice switching_step(const MtjDevice& device, double current, double dt,
                         const SwitchingParams& s) {
  return switching_step(device, current, dt, switching_prefactor(device.params, s));
}

double transistor_current(double v_across, Gate gate, const TransistorModel& t) {
  if (gate == Gate::Off) return v_across / t.r_off;
  const double linear = v_across / t.r_on;
  return std::clamp(linear, -t.i_sat, t.i_sat);
}

}  // namespace xpoint
