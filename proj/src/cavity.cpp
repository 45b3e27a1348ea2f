#include "stt/cavity.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace stt {

namespace {

constexpr double kPi = std::numbers::pi;

double coefficient_of_finesse(double r) { return 4.0 * r / ((1.0 - r) * (1.0 - r)); }

/// Distance of x to the nearest integer.
double folded(double x) { return std::abs(x - std::round(x)); }

}  // namespace

void validate(const CavityParams& p) {
  if (!(p.mirror_reflectivity > 0.0 && p.mirror_reflectivity < 1.0)) {
    throw std::invalid_argument("cavity.mirror_reflectivity must lie in (0, 1)");
  }
  if (!(p.spacing > 0.0)) throw std::invalid_argument("cavity.spacing must be > 0");
  if (!(p.refractive_index > 0.0)) {
    throw std::invalid_argument("cavity.refractive_index must be > 0");
  }
  const double g = p.g1() * p.g2();
  if (!(g >= 0.0 && g <= 1.0)) {
    throw std::invalid_argument("cavity is unstable: g1*g2 = " + std::to_string(g) +
                                " outside [0, 1]");
  }
  if (!(p.resonant_transmission_cap >= 0.0 && p.resonant_transmission_cap <= 1.0)) {
    throw std::invalid_argument("cavity.resonant_transmission_cap must lie in [0, 1]");
  }
  if (!(p.reflection_cap >= 0.0 && p.reflection_cap <= 1.0)) {
    throw std::invalid_argument("cavity.reflection_cap must lie in [0, 1]");
  }
  if (!(p.mode_overlap_attenuation >= 0.0 && p.mode_overlap_attenuation <= 1.0)) {
    throw std::invalid_argument("cavity.mode_overlap_attenuation must lie in [0, 1]");
  }
}

double airy_transmission(const CavityParams& p, double nu_hz) {
  if (nu_hz < 0.0) throw std::invalid_argument("airy_transmission: negative frequency");
  const double phase =
      2.0 * kPi * nu_hz * p.refractive_index * p.spacing / p.speed_of_light;
  const double s = std::sin(phase);
  return 1.0 / (1.0 + coefficient_of_finesse(p.mirror_reflectivity) * s * s);
}

double airy_transmission_detuned(const CavityParams& p, double detuning_hz) {
  const double s = std::sin(kPi * detuning_hz / fsr(p));
  return 1.0 / (1.0 + coefficient_of_finesse(p.mirror_reflectivity) * s * s);
}

double finesse(const CavityParams& p) {
  const double r = p.mirror_reflectivity;
  if (!(r > 0.0 && r < 1.0)) {
    throw std::invalid_argument("finesse: mirror reflectivity must lie in (0, 1)");
  }
  return kPi * std::sqrt(r) / (1.0 - r);
}

double fsr(const CavityParams& p) {
  if (!(p.spacing > 0.0)) throw std::invalid_argument("fsr: spacing must be > 0");
  return p.speed_of_light / (2.0 * p.refractive_index * p.spacing);
}

double fwhm(const CavityParams& p) { return fsr(p) / finesse(p); }

double gouy_factor(const CavityParams& p) {
  const double g = p.g1() * p.g2();
  if (!(g >= 0.0 && g <= 1.0)) {
    throw std::invalid_argument("gouy_factor: unstable cavity, g1*g2 outside [0, 1]");
  }
  return std::acos(std::sqrt(g)) / kPi;
}

CavitySpectrum make_spectrum(const CavityParams& p) {
  return {finesse(p), fsr(p), fwhm(p), gouy_factor(p)};
}

double eigenfrequency(const CavityParams& p, int l, int p_index, int m) {
  if (p_index < 0) throw std::invalid_argument("eigenfrequency: p must be >= 0");
  const double order = 2.0 * p_index + std::abs(l) + 1.0;
  return fsr(p) * (m + order * gouy_factor(p));
}

double mode_detuning(const CavityParams& p, int l, int p_index, double extra_detuning_hz) {
  const double fsr_hz = fsr(p);
  const double transverse = (2.0 * p_index + std::abs(l)) * gouy_factor(p) * fsr_hz;
  const double total = transverse + p.lock_offset_hz + extra_detuning_hz;
  return total - fsr_hz * std::round(total / fsr_hz);
}

ModeResponse mode_response(const CavityParams& p, const ModeLabel& label,
                           double lock_error_hz) {
  const bool fundamental = label.l == 0 && label.p == 0;
  double airy;
  if (p.airy_model) {
    airy = airy_transmission_detuned(p, mode_detuning(p, label.l, label.p, lock_error_hz));
  } else {
    airy = fundamental ? 1.0 : 0.0;
  }
  double t2 = p.resonant_transmission_cap * airy;
  if (!fundamental) t2 *= p.mode_overlap_attenuation;
  const double r2 = p.reflection_cap * (1.0 - t2);
  return {Complex(std::sqrt(t2), 0.0), Complex(std::sqrt(r2), 0.0)};
}

ModeResponse mode_response(const CavityParams& p, const ModeLabel& label,
                           const LockState& lock, double probe_wavelength) {
  return mode_response(p, label, lock.length_error * detuning_per_meter(p, probe_wavelength));
}

int max_clean_oam(const CavitySpectrum& spectrum, double criterion, int scan_limit) {
  if (!(criterion > 0.0)) throw std::invalid_argument("max_clean_oam: criterion must be > 0");
  const double threshold = criterion * spectrum.fwhm_hz / spectrum.fsr_hz;
  for (int l = 1; l <= scan_limit; ++l) {
    if (folded(l * spectrum.gouy_factor) < threshold) return l - 1;
  }
  return scan_limit;
}

int max_clean_oam(const CavityParams& params, double criterion, int scan_limit) {
  return max_clean_oam(make_spectrum(params), criterion, scan_limit);
}

double pulse_linewidth(double duration_s, LinewidthConvention convention) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("pulse_linewidth: duration must be > 0");
  switch (convention) {
    case LinewidthConvention::UncertaintyLimit:
      return 1.0 / (4.0 * kPi * duration_s);
    case LinewidthConvention::GaussianTimeBandwidth:
      return 0.44 / duration_s;
  }
  throw std::invalid_argument("pulse_linewidth: unknown convention");
}

double detuning_per_meter(const CavityParams& p, double probe_wavelength) {
  return p.speed_of_light / probe_wavelength / p.spacing;
}

LockState lock_step(const CavityParams& p, const LockState& lock, double dt,
                    double disturbance, double probe_wavelength) {
  if (!(dt > 0.0)) throw std::invalid_argument("lock_step: dt must be > 0");
  const double half_width = 0.5 * fwhm(p);
  const double kappa = detuning_per_meter(p, probe_wavelength);
  const double x = lock.length_error + disturbance;

  // Side-of-fringe discriminant: reflected probe power relative to its value
  // at the lock point. Near zero error this is ~(length error)/(FWHM length).
  const double reflected = 1.0 - airy_transmission_detuned(p, kappa * x + half_width);
  const double setpoint = 1.0 - airy_transmission_detuned(p, half_width);
  const double error = reflected - setpoint;

  LockState next = lock;
  next.integrator = lock.integrator + lock.gain_i * error;
  const double correction = (lock.gain_p * error + next.integrator) * (fwhm(p) / kappa);
  next.length_error = x - correction;
  return next;
}

}  // namespace stt
