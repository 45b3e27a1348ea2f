#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>

#include "stt/elements.hpp"
#include "stt/state.hpp"
#include "stt/transcoder.hpp"

namespace stt {

enum class PulseShape { Gaussian, Square };

struct WaveformParams {
  double pulse_fwhm = 5e-9;
  double sample_period = 0.05e-9;
  double bandwidth_hz = 0.0;  // detector single-pole low-pass; 0 disables
  PulseShape shape = PulseShape::Gaussian;
  double padding = 4.0;  // rendered margin in units of pulse FWHM
  // Explicit render window; NaN derives it from the populated bins.
  double window_start = std::numeric_limits<double>::quiet_NaN();
  double window_end = std::numeric_limits<double>::quiet_NaN();
};

/// Uniformly sampled detector-style intensity trace.
struct Waveform {
  Eigen::ArrayXd time;       // s
  Eigen::ArrayXd intensity;  // arbitrary units, >= 0
  double sample_period = 0.0;

  double integral() const;
  double peak_time() const;
};

/// Renders bin powers as unit-area pulse envelopes centered at t0 + bin * T,
/// optionally low-passed to mimic the detection chain. The filter is a
/// rendering step only; it never feeds back into the physics.
Waveform render_waveform(const PulseState& bins, double round_trip_time,
                         const WaveformParams& params = {});

inline constexpr double kCrosstalkFloorDb = -60.0;

/// Nearest-neighbour cross-talk of a conversion matrix, in dB relative to
/// the correct output. Neighbours outside the matrix are undefined (the
/// table's "*"); ratios at or below the floor are reported as sentinels and
/// kept out of the mean.
struct CrosstalkEntry {
  enum class Kind { Value, Undefined, BelowFloor };
  Kind kind = Kind::Undefined;
  double db = 0.0;
};

struct CrosstalkTable {
  Direction direction = Direction::Forward;
  std::vector<CrosstalkEntry> before;  // output one index early (t-T / l-1)
  std::vector<CrosstalkEntry> after;   // output one index late (t+T / l+1)
  std::optional<double> mean_db;       // over defined, above-floor entries
  int counted = 0;

  int size() const { return static_cast<int>(before.size()); }
};

CrosstalkTable crosstalk_table(const EfficiencyMatrix& m,
                               double floor_db = kCrosstalkFloorDb);

/// (I_max - I_min) / (I_max + I_min).
double visibility(double i_max, double i_min);

/// Visibility of the interfered bin over an mz_readout sweep. The bin whose
/// intensity swings the most across the sweep is taken as the interference
/// bin; it is also the reference for fringe_phase_from_sweep.
double visibility_from_sweep(const std::vector<MzReadoutPoint>& sweep);

/// Fringe phase from the first angular harmonic of the swept intensity;
/// exact for a uniform full-period sweep of three or more points.
double fringe_phase_from_sweep(const std::vector<MzReadoutPoint>& sweep);

/// Power collected when the output is flattened by a fork pattern of charge
/// -target_l and coupled into the single-mode fibre.
double projective_measurement(const PulseState& output, int target_l,
                              const SlmParams& slm, const FibreCouplerParams& coupler);

/// Projection onto an arbitrary normalized target state (the SLM displaying
/// the superposition pattern): |<target|output>|^2 * efficiency.
double projective_measurement(const PulseState& output, const PulseState& target,
                              double efficiency = 1.0);

/// (|i> + e^{i phase} |j>)/sqrt(2) over charges at bin 0.
PulseState superposition_target(int charge_i, int charge_j, double phase = 0.0);

enum class IndexKind { Bin, Charge };

/// Undoes the known geometric circulation loss: each term is rescaled by
/// gamma^(index/2) in amplitude and the result renormalized. Index is the
/// bin (forward outputs) or the charge (reverse outputs).
PulseState loss_compensated(const PulseState& s, double gamma, IndexKind kind);

/// Normalized per-bin (or per-charge) intensity distribution.
std::map<int, double> bin_distribution(const PulseState& s);
std::map<int, double> charge_distribution(const PulseState& s);

}  // namespace stt
