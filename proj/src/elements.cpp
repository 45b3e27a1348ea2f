#include "stt/elements.hpp"

#include <cmath>

namespace stt {

namespace {

void check_unit_range(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

/// Applies `f(label, amp, out)` to every term and rebuilds the state.
template <typename F>
PulseState map_terms(const PulseState& s, F&& f) {
  StateBuilder b(s.t0(), s.prune_threshold());
  for (const auto& [label, amp] : s.terms()) f(label, amp, b);
  return b.finish();
}

PulseState swap_polarization(const PulseState& s, double transmission) {
  check_unit_range(transmission, "transmission");
  const double a = std::sqrt(transmission);
  return map_terms(s, [a](ModeLabel label, Complex amp, StateBuilder& b) {
    label.pol = flipped(label.pol);
    b.add(label, amp * a);
  });
}

}  // namespace

std::pair<PulseState, PulseState> pbs(const PulseState& s) {
  StateBuilder t(s.t0(), s.prune_threshold());
  StateBuilder r(s.t0(), s.prune_threshold());
  for (const auto& [label, amp] : s.terms()) {
    (label.pol == Polarization::H ? t : r).add(label, amp);
  }
  return {t.finish(), r.finish()};
}

bool eom_gate_open(double t_arrival, const EomParams& params) {
  for (const auto& w : params.gate_windows) {
    if (t_arrival >= w.start && t_arrival < w.end) return true;
  }
  return false;
}

PulseState eom(const PulseState& s, double t_arrival, const EomParams& params) {
  if (!std::isfinite(t_arrival)) throw std::invalid_argument("eom: non-finite arrival time");
  if (eom_gate_open(t_arrival, params)) return swap_polarization(s, params.transmission);
  return attenuate(s, params.transmission);
}

PulseState vpp(const PulseState& s, PassDirection direction, const VppParams& params) {
  check_unit_range(params.transmission, "VPP transmission");
  check_unit_range(params.unshifted_fraction, "VPP unshifted fraction");
  const int step =
      direction == PassDirection::Forward ? params.charge_step : -params.charge_step;
  const double a = std::sqrt(params.transmission);
  const double shifted = std::sqrt(1.0 - params.unshifted_fraction);
  const double leak = std::sqrt(params.unshifted_fraction);
  return map_terms(s, [&](ModeLabel label, Complex amp, StateBuilder& b) {
    ModeLabel moved = label;
    moved.l += step;
    b.add(moved, amp * a * shifted);
    if (leak > 0.0) b.add(label, amp * a * leak);
  });
}

PulseState mirror(const PulseState& s, double reflectivity) {
  check_unit_range(reflectivity, "mirror reflectivity");
  const double a = std::sqrt(reflectivity);
  return map_terms(s, [a](ModeLabel label, Complex amp, StateBuilder& b) {
    label.l = -label.l;
    b.add(label, amp * a);
  });
}

PulseState hwp(const PulseState& s, const WavePlateParams& params) {
  return swap_polarization(s, params.transmission);
}

PulseState qwp_double_pass(const PulseState& s, const WavePlateParams& params) {
  return swap_polarization(s, params.transmission);
}

PulseState slm_fork(const PulseState& s, const SlmParams& params) {
  check_unit_range(params.diffraction_efficiency, "SLM diffraction efficiency");
  const double a = std::sqrt(params.diffraction_efficiency);
  return map_terms(s, [&](ModeLabel label, Complex amp, StateBuilder& b) {
    label.l += params.pattern_charge;
    b.add(label, amp * a);
  });
}

PulseState fibre_coupler(const PulseState& s, const FibreCouplerParams& params) {
  check_unit_range(params.efficiency, "coupler efficiency");
  check_unit_range(params.extinction, "coupler extinction");
  const double a = std::sqrt(params.efficiency);
  const double leak = std::sqrt(params.efficiency * params.extinction);
  return map_terms(s, [&](const ModeLabel& label, Complex amp, StateBuilder& b) {
    if (label.l == 0 && label.p == 0) {
      b.add(label, amp * a);
    } else if (leak > 0.0) {
      b.add(label, amp * leak);
    }
  });
}

PulseState four_f(const PulseState& s, const FourFParams& params) {
  return attenuate(s, params.transmission);
}

PulseState attenuate(const PulseState& s, double intensity_transmission) {
  check_unit_range(intensity_transmission, "transmission");
  const double a = std::sqrt(intensity_transmission);
  return map_terms(s, [a](const ModeLabel& label, Complex amp, StateBuilder& b) {
    b.add(label, amp * a);
  });
}

}  // namespace stt
