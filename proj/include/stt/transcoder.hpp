#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stt/cavity.hpp"
#include "stt/elements.hpp"
#include "stt/state.hpp"

namespace stt {

/// One optical surface (or group) traversed per round trip, with its
/// intensity transmission and how many times the pulse meets it per loop.
/// The multiplicity is explicit because the per-loop budget depends on the
/// exact counting; the shipped defaults document one counting that lands at
/// the measured 60.2% component product.
struct ChainComponent {
  std::string name;
  double transmission = 1.0;
  int passes_per_loop = 1;
};

enum class Direction { Forward, Reverse };

/// Compact EOM gate specification the engine expands into per-round windows:
/// forward gates every return traversal starting at trigger_time; reverse
/// gates the single release window at trigger_time.
struct EomSchedule {
  Direction mode = Direction::Forward;
  double trigger_time = 0.0;
  double window = 5.5e-9;  // each gate, must stay below the round-trip time
};

struct LoopParams {
  double round_trip_time = 11e-9;  // T
  double t0 = 0.0;                 // forward: exit time of charge 0; reverse: release time
  int max_loops = 16;
  std::vector<ChainComponent> chain;
  double reentry_coupling = 1.0;   // mode match back into the cavity, per loop
  int vpp_charge_step = -1;        // charge shift per forward VPP pass, +-1
  double vpp_unshifted_fraction = 0.0;  // conversion-purity leak per VPP pass
  int scatter_charge = 1;          // charge tag of the resonantly reflected remainder
  double eom_gate_width = 5.5e-9;
  /// Manual gate windows replace the auto schedule when non-empty
  /// (fault-injection hook).
  std::vector<GateWindow> manual_gate_windows;
};

void validate(const LoopParams& params);

/// Product of component transmissions (with multiplicity) and the reentry
/// coupling: the intensity survival per round trip.
double per_loop_transmission(const LoopParams& params);

/// Circulation loss figure: adjacent output bins differ by this intensity
/// ratio's reciprocal.
double circulation_loss_gamma(const LoopParams& params);

/// Expands a compact schedule into explicit gate windows: a window per return
/// traversal (forward) or the single release window (reverse).
std::vector<GateWindow> expand_gate_schedule(const EomSchedule& schedule,
                                             double round_trip_time, int max_loops);

/// Auto-generated EOM gate windows for a run; manual windows take precedence.
std::vector<GateWindow> make_gate_windows(const LoopParams& params, Direction direction);

struct TraceEvent {
  double time = 0.0;
  std::string element;
  double power = 0.0;
};

struct SimulationTrace {
  std::vector<TraceEvent> events;
};

struct TranscoderParams {
  CavityParams cavity;
  LoopParams loop;
  FibreCouplerParams output_coupler;  // forward collection fibre / reverse projection fibre
};

/// Outcome of one conversion run. Losses are accounted per channel so that
/// output power + losses reproduces the input power.
struct RunResult {
  PulseState output;
  SimulationTrace trace;
  std::map<std::string, double> losses;
  double input_power = 0.0;

  double total_loss() const;
};

/// OAM -> time bin. Input terms live at bin 0 with charges 0..max_loops;
/// charge l exits at bin l attenuated by the per-loop factor each round.
RunResult run_forward(const TranscoderParams& params, const PulseState& input);

/// Time bin -> OAM. Input terms are fundamental-mode pulses at bins <= 0
/// (arrival t0 + bin*T); the bin -l component leaves at t0 carrying charge l.
RunResult run_reverse(const TranscoderParams& params, const PulseState& input);

/// Re-expresses a forward output train as the time-mirrored reverse input
/// (bin k -> bin -k), the composition used by round-trip checks.
PulseState as_reverse_input(const PulseState& forward_output);

/// Unbalanced Mach-Zehnder used to prepare and read out bin superpositions.
struct MzParams {
  double arm_delay = 11e-9;      // default one bin spacing (3.3 m of path)
  double splitting = 0.5;        // power fraction into the undelayed arm
  double relative_phase = 0.0;   // phase picked up in the long arm
  double arm_loss = 1.0;         // intensity transmission of the long arm
  double coherence = 1.0;        // mutual coherence of the arms; 0 kills fringes
};

void validate(const MzParams& params);

/// Splits each pulse into an undelayed copy and a delayed copy arm_delay/T
/// bins later. arm_delay must sit on the bin grid.
PulseState mz_prepare(const PulseState& input, const MzParams& mz, double round_trip_time);

struct MzReadoutPoint {
  double phase = 0.0;
  std::map<int, double> bin_powers;
};

/// Recombination sweep: for each phase, every bin k interferes with bin
/// k - delay through the second traversal of the interferometer.
std::vector<MzReadoutPoint> mz_readout(const PulseState& output, const MzParams& mz,
                                       std::span<const double> phase_sweep,
                                       double round_trip_time);

/// Intensity transfer matrix: rows are basis inputs (charge l forward, bin -l
/// reverse), columns the matching output index.
struct EfficiencyMatrix {
  Direction direction = Direction::Forward;
  Eigen::MatrixXd values;

  int size() const { return static_cast<int>(values.rows()); }
};

EfficiencyMatrix conversion_matrix(const TranscoderParams& params, Direction direction,
                                   int l_range);

}  // namespace stt
