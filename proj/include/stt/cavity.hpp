#pragma once

#include "stt/state.hpp"

namespace stt {

/// CODATA speed of light. The rounded 3e8 value is available as a config
/// switch for reproducing tabulated numbers computed with it.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Mode-filtering Fabry-Perot cavity.
///
/// The cavity is locked to the fundamental (l=0, p=0) resonance. Transverse
/// modes sit at Gouy-phase offsets of the eigenfrequency comb and are
/// rejected according to the Airy transmission at their detuning.
struct CavityParams {
  double mirror_reflectivity = 0.95;   // intensity R of each mirror
  double spacing = 0.010;              // mirror separation d (m)
  double refractive_index = 1.0;
  double curvature_radius_1 = 0.050;   // mirror curvature radii (m)
  double curvature_radius_2 = 0.050;
  double lock_offset_hz = 0.0;         // lock-point detuning from resonance

  /// Measured on-resonance transmission cap; 1.0 recovers the ideal Airy
  /// peak. The end-to-end measurement bundles mode-matching loss the plane
  /// formula cannot see, so it is applied multiplicatively.
  double resonant_transmission_cap = 0.90;
  /// Off-resonance reflection cap (1.0 keeps |t|^2 + |r|^2 = 1).
  double reflection_cap = 1.0;
  /// Optional extra per-mode intensity attenuation of the transmitted field
  /// for nonzero (l, p), standing in for transverse-overlap mismatch. The
  /// default applies none.
  double mode_overlap_attenuation = 1.0;

  double speed_of_light = kSpeedOfLight;

  /// When false, nonzero-(l,p) modes reflect perfectly and the resonant mode
  /// transmits at the cap: the idealized filter used by lossless analyses.
  bool airy_model = true;

  double g1() const { return 1.0 - spacing / curvature_radius_1; }
  double g2() const { return 1.0 - spacing / curvature_radius_2; }
};

/// Derived resonance figures.
struct CavitySpectrum {
  double finesse = 0.0;
  double fsr_hz = 0.0;
  double fwhm_hz = 0.0;
  double gouy_factor = 0.0;  // acos(sqrt(g1 g2)) / pi
};

/// Throws std::invalid_argument naming the offending field.
void validate(const CavityParams& params);

/// Airy transmission at absolute optical frequency nu.
double airy_transmission(const CavityParams& params, double nu_hz);

/// Airy transmission at a detuning from resonance.
double airy_transmission_detuned(const CavityParams& params, double detuning_hz);

double finesse(const CavityParams& params);
double fsr(const CavityParams& params);
double fwhm(const CavityParams& params);
double gouy_factor(const CavityParams& params);
CavitySpectrum make_spectrum(const CavityParams& params);

/// Eigenfrequency of transverse mode (l, p) on longitudinal index m.
double eigenfrequency(const CavityParams& params, int l, int p, int m);

/// Detuning of mode (l, p) from the nearest lock-comb resonance, including
/// the configured lock offset. Folded into [-FSR/2, FSR/2].
double mode_detuning(const CavityParams& params, int l, int p,
                     double extra_detuning_hz = 0.0);

/// Complex transmission/reflection amplitudes seen by one mode.
struct ModeResponse {
  Complex t{0.0, 0.0};
  Complex r{0.0, 0.0};

  double transmission() const { return std::norm(t); }
  double reflection() const { return std::norm(r); }
};

ModeResponse mode_response(const CavityParams& params, const ModeLabel& label,
                           double lock_error_hz = 0.0);

struct LockState;

/// Same, with the detuning taken from a lock loop's residual length error.
ModeResponse mode_response(const CavityParams& params, const ModeLabel& label,
                           const LockState& lock, double probe_wavelength = 795e-9);

/// Largest l such that every charge 1..l keeps its eigenfrequency farther
/// than criterion * FWHM from the nearest fundamental resonance (distance
/// minimized over longitudinal index, both sides of the comb line).
/// Brute-force scan up to scan_limit; returns scan_limit if nothing violates.
int max_clean_oam(const CavitySpectrum& spectrum, double criterion,
                  int scan_limit = 1000);
int max_clean_oam(const CavityParams& params, double criterion,
                  int scan_limit = 1000);

enum class LinewidthConvention {
  UncertaintyLimit,      // 1 / (4 pi tau)
  GaussianTimeBandwidth  // 0.44 / tau
};

double pulse_linewidth(double duration_s, LinewidthConvention convention =
                                              LinewidthConvention::UncertaintyLimit);

/// Cavity-length lock loop state. The error signal is the reflected power of
/// a probe offset half a linewidth onto the fringe side, so the main beam
/// sits on resonance at zero length error.
struct LockState {
  double length_error = 0.0;  // m, deviation from the lock point
  double integrator = 0.0;
  double noise_rms = 0.0;     // descriptive; the caller owns the sequence
  double gain_p = 1.2;
  double gain_i = 0.25;
};

/// One proportional-integral update. `disturbance` is the length change (m)
/// injected this step before the correction acts.
LockState lock_step(const CavityParams& params, const LockState& lock, double dt,
                    double disturbance, double probe_wavelength = 795e-9);

/// Frequency detuning equivalent of a mirror-spacing error.
double detuning_per_meter(const CavityParams& params, double probe_wavelength = 795e-9);

}  // namespace stt
