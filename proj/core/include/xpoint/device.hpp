#pragma once

#include <numbers>
#include <optional>
#include <string_view>

namespace xpoint {

namespace phys {
inline constexpr double kBohrMagneton = 9.2740100783e-24;     // J/T
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kEulerGamma = std::numbers::egamma;
}  // namespace phys

/// Compact-model constants of one MTJ. Units follow the device data sheet
/// convention (nm, nm², Ω·µm², A/cm²), conversions happen in the functions.
struct MtjParams {
  double tox_nm = 0.95;
  double surface_nm2 = std::numbers::pi / 4.0 * 65.0 * 65.0;
  double ra_ohm_um2 = 10.0;
  double tmr = 1.5;
  double jc_a_per_cm2 = 5.7e6;
  double phi_bar_ev = 0.4;
  double k_factor = 332.2;
  double t_free_nm = 1.3;
  double ms_a_per_m = 456.0e3;
  double temperature_k = 300.0;

  static double circular_surface(double diameter_nm) {
    return std::numbers::pi / 4.0 * diameter_nm * diameter_nm;
  }
  bool operator==(const MtjParams&) const = default;
};

/// Throws ParameterError naming the first offending field.
void validate(const MtjParams& p);

enum class DynamicsModel { Calibrated, Physical, Lumped };

/// Constants of the mean switching-delay model
///   1/tau = [2 / (C + ln(pi^2 xi / 4))] * muB P / (e m (1 + P^2)) * (I - Ic0).
/// Only the lumped prefactor in front of (I - Ic0) matters for the
/// simulation; it comes from one of three sources selected by `model`.
struct SwitchingParams {
  DynamicsModel model = DynamicsModel::Calibrated;
  double euler_c = phys::kEulerGamma;
  double xi = 40.0;
  double polarization = 0.6;
  // Free-layer moment in A·m². Unset means M_S x surface x t_free.
  std::optional<double> magnetic_moment;
  // Used when model == Lumped, in 1/(A·s).
  double prefactor = 0.0;
  // Used when model == Calibrated: tau(ratio * Ic0) == delay.
  double calibration_ratio = 1.3;
  double calibration_delay_s = 10e-9;

  bool operator==(const SwitchingParams&) const = default;
};

void validate(const SwitchingParams& s);

enum class MtjState { P, AP };

/// P stores '0', AP stores '1'.
constexpr bool logic_value(MtjState s) { return s == MtjState::AP; }
constexpr MtjState state_for(bool bit) { return bit ? MtjState::AP : MtjState::P; }
constexpr MtjState flipped(MtjState s) { return s == MtjState::P ? MtjState::AP : MtjState::P; }
std::string_view to_string(MtjState s);

// Positive current flows from the free layer (bit line) to the reference
// layer (word line) and drives P -> AP. Negative current drives AP -> P.
inline constexpr MtjState kPositiveCurrentTarget = MtjState::AP;

/// Target state favoured by a current of the given sign.
constexpr MtjState driven_state(double current) {
  return current > 0.0 ? kPositiveCurrentTarget : flipped(kPositiveCurrentTarget);
}

struct MtjDevice {
  MtjParams params;
  MtjState state = MtjState::P;
  // Fraction of the switching delay already accumulated, in [0, 1).
  double progress = 0.0;

  bool operator==(const MtjDevice&) const = default;
};

/// Piecewise-linear selection / driver transistor.
struct TransistorModel {
  double r_on = 50.0;
  double i_sat = 5e-3;
  double r_off = 1e9;
  double width_f2 = 56.0;

  bool operator==(const TransistorModel&) const = default;
};

void validate(const TransistorModel& t);

// --- resistance ------------------------------------------------------------

double mtj_resistance(MtjState state, const MtjParams& p);

/// Barrier resistance from the Brinkman tunnelling expression, anchored so
/// that the nominal (tox, surface) reproduces ra_product / surface. Only the
/// 1/surface and exponential-in-tox scaling survive the anchoring.
double brinkman_resistance(double tox_nm, double surface_nm2, const MtjParams& p);

/// Un-anchored Brinkman expression with tox in Å and surface in µm².
double brinkman_raw(double tox_nm, double surface_nm2, double phi_bar_ev, double k_factor);

/// Surface giving a reference junction of (R_AP + R_P) / 2 at nominal tox.
double reference_surface(const MtjParams& p);

/// Parameters of the reference-sized junction (same stack, smaller surface).
MtjParams reference_params(const MtjParams& p);

// --- switching -------------------------------------------------------------

/// I_C0 in amperes.
double critical_current(const MtjParams& p);

/// Moment of the free layer implied by M_S and the free-layer volume.
double free_layer_moment(const MtjParams& p);

/// Lumped prefactor A (1/(A·s)) in 1/tau = A (I - Ic0).
double switching_prefactor(const MtjParams& p, const SwitchingParams& s);

/// Mean switching delay in seconds, or nullopt when |i| does not exceed Ic0.
std::optional<double> switching_delay(double i_write, const MtjParams& p,
                                      const SwitchingParams& s);

/// Same as switching_delay with a precomputed prefactor.
std::optional<double> switching_delay_with(double i_write, double ic0, double prefactor);

/// Advances the quasi-static switching progress of one device by dt.
MtjDevice switching_step(MtjDevice device, double current, double dt, double prefactor);
MtjDevice switching_step(const MtjDevice& device, double current, double dt,
                         const SwitchingParams& s);

// --- transistor ------------------------------------------------------------

enum class Gate { Off, On };

double transistor_current(double v_across, Gate gate, const TransistorModel& t);

}  // namespace xpoint
