#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stt {

using Complex = std::complex<double>;

/// Polarization of a pulse component. H transmits at a PBS, V reflects.
enum class Polarization : std::uint8_t { H, V };

constexpr Polarization flipped(Polarization p) {
  return p == Polarization::H ? Polarization::V : Polarization::H;
}

char pol_char(Polarization p);
Polarization pol_from_char(char c);

/// Discrete mode label: (polarization, topological charge l, radial index p,
/// time-bin index). Physical arrival time of a bin is t0 + bin * T.
/// Labels order lexicographically, which fixes the iteration order of every
/// state and with it the floating-point summation order.
struct ModeLabel {
  Polarization pol = Polarization::H;
  int l = 0;
  int p = 0;
  int bin = 0;

  friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

std::string to_string(const ModeLabel& label);

/// Sparse complex-amplitude superposition over ModeLabels.
///
/// Immutable value type: every operation returns a new state. Amplitudes are
/// dimensionless; |amp|^2 is the intensity fraction carried by that mode, and
/// the total over all terms stays within [0, 1 + 1e-12]. Terms whose
/// intensity falls below the prune threshold are dropped on construction.
class PulseState {
 public:
  static constexpr double kDefaultPruneThreshold = 1e-15;
  static constexpr double kPowerTolerance = 1e-12;

  PulseState() = default;
  explicit PulseState(double t0, double prune_threshold = kDefaultPruneThreshold)
      : t0_(t0), prune_threshold_(prune_threshold) {}

  /// Unit-amplitude single-mode state.
  static PulseState basis(const ModeLabel& label, double t0 = 0.0);

  const std::map<ModeLabel, Complex>& terms() const { return amps_; }
  double t0() const { return t0_; }
  double prune_threshold() const { return prune_threshold_; }
  bool empty() const { return amps_.empty(); }
  std::size_t size() const { return amps_.size(); }

  /// Amplitude of a label, 0 if absent.
  Complex amplitude(const ModeLabel& label) const;

  /// Same terms, new reference time.
  PulseState with_t0(double t0) const;

 private:
  friend class StateBuilder;

  std::map<ModeLabel, Complex> amps_;
  double t0_ = 0.0;
  double prune_threshold_ = kDefaultPruneThreshold;
};

/// Accumulates amplitudes term by term, then prunes and validates once.
/// The only mutable path into a PulseState; used by element operators and the
/// loop engine so intermediate sums never materialize as invalid states.
class StateBuilder {
 public:
  explicit StateBuilder(double t0 = 0.0,
                        double prune_threshold = PulseState::kDefaultPruneThreshold)
      : t0_(t0), prune_threshold_(prune_threshold) {}

  void add(const ModeLabel& label, Complex amp);

  /// Power currently accumulated (pre-prune).
  double power() const;

  /// Prunes sub-threshold terms, validates total power <= 1 + tol, and
  /// returns the finished state. Pruned power is reported through `pruned`
  /// when given.
  PulseState finish(double* pruned = nullptr);

 private:
  std::map<ModeLabel, Complex> amps_;
  double t0_;
  double prune_threshold_;
};

/// Sum of (label, amplitude) terms; duplicate labels coalesce.
/// Rejects non-finite amplitudes and total power above 1 + 1e-12.
PulseState superpose(std::span<const std::pair<ModeLabel, Complex>> terms,
                     double t0 = 0.0,
                     double prune_threshold = PulseState::kDefaultPruneThreshold);
PulseState superpose(std::initializer_list<std::pair<ModeLabel, Complex>> terms,
                     double t0 = 0.0);

using LabelPredicate = std::function<bool(const ModeLabel&)>;

double total_power(const PulseState& s);
double power_in(const PulseState& s, const LabelPredicate& pred);
double power_in_bin(const PulseState& s, int bin);
double power_in_charge(const PulseState& s, int l);

/// sum over shared labels of conj(a) * b. overlap(s, s) == total_power(s).
Complex overlap(const PulseState& a, const PulseState& b);

/// State rescaled to unit total power. Errors on an empty state.
PulseState normalized(const PulseState& s);

/// Bin (or charge) index carrying the most power; errors on empty states.
int argmax_bin(const PulseState& s);
int argmax_charge(const PulseState& s);

/// JSON round trip, schema:
/// {"t0_ns": number, "terms": [{"pol":"H"|"V","l":int,"p":int,"bin":int,
///                              "re":number,"im":number}]}
std::string state_to_json(const PulseState& s);
PulseState state_from_json(const std::string& text);

}  // namespace stt
