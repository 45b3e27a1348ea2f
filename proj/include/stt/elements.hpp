#pragma once

#include <utility>
#include <vector>

#include "stt/state.hpp"

namespace stt {

/// One EOM gate interval [start, end) in seconds.
struct GateWindow {
  double start = 0.0;
  double end = 0.0;
};

/// Electro-optic modulator: time-gated H<->V switch. The pulse is treated as
/// atomic; a gate either catches the whole pulse at its arrival time or
/// misses it. `transmission` is the intensity transmission of the full
/// traversal (a double pass, for the loop geometry modeled here).
struct EomParams {
  double transmission = 1.0;
  std::vector<GateWindow> gate_windows;
};

/// Vortex phase plate: shifts the topological charge by `charge_step` per
/// forward pass (and by -charge_step backward). `unshifted_fraction` is the
/// intensity fraction that leaks through without acquiring the shift, the
/// dominant cross-talk mechanism of the loop.
struct VppParams {
  double transmission = 1.0;
  int charge_step = -1;
  double unshifted_fraction = 0.0;
};

enum class PassDirection { Forward, Backward };

/// SLM fork hologram: first diffracted order picks up `pattern_charge`.
struct SlmParams {
  int pattern_charge = 0;
  double diffraction_efficiency = 1.0;
};

/// Wave plate used at a swap setting. The fast-axis angle is carried for
/// completeness but only the exact H<->V swap is exercised by the chain.
struct WavePlateParams {
  double transmission = 1.0;
  double fast_axis_angle = 0.0;
};

/// Single-mode fibre coupler: projects onto (l=0, p=0). Residual nonzero-l
/// light couples with intensity `extinction` (0 = ideal rejection).
struct FibreCouplerParams {
  double efficiency = 1.0;
  double extinction = 0.0;
};

struct FourFParams {
  double transmission = 1.0;
};

/// Polarizing beam splitter: (transmitted H, reflected V). Power conserving.
std::pair<PulseState, PulseState> pbs(const PulseState& s);

/// Swap H<->V if the arrival time falls inside a gate window, then apply the
/// element transmission.
PulseState eom(const PulseState& s, double t_arrival, const EomParams& params);

bool eom_gate_open(double t_arrival, const EomParams& params);

PulseState vpp(const PulseState& s, PassDirection direction, const VppParams& params);

/// Mirror reflection: l -> -l, amplitude * sqrt(reflectivity).
PulseState mirror(const PulseState& s, double reflectivity = 1.0);

/// Half-wave plate at the swap setting: exact H<->V.
PulseState hwp(const PulseState& s, const WavePlateParams& params);

/// Quarter-wave plate double pass, likewise an exact H<->V swap.
PulseState qwp_double_pass(const PulseState& s, const WavePlateParams& params);

PulseState slm_fork(const PulseState& s, const SlmParams& params);

PulseState fibre_coupler(const PulseState& s, const FibreCouplerParams& params);

/// Beam-quality restoration stage; identity on labels.
PulseState four_f(const PulseState& s, const FourFParams& params);

/// Uniform amplitude scale by sqrt(intensity_transmission).
PulseState attenuate(const PulseState& s, double intensity_transmission);

}  // namespace stt
