#include "stt/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace stt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

}  // namespace

double Waveform::integral() const { return intensity.sum() * sample_period; }

double Waveform::peak_time() const {
  Eigen::Index i;
  intensity.maxCoeff(&i);
  return time[i];
}

Waveform render_waveform(const PulseState& bins, double round_trip_time,
                         const WaveformParams& params) {
  if (!(params.pulse_fwhm > 0.0)) {
    throw std::invalid_argument("waveform.pulse_fwhm must be > 0");
  }
  if (!(params.pulse_fwhm < round_trip_time)) {
    throw std::invalid_argument("waveform.pulse_fwhm must stay below the bin spacing");
  }
  if (!(params.sample_period > 0.0)) {
    throw std::invalid_argument("waveform.sample_period must be > 0");
  }
  if (bins.empty()) throw std::invalid_argument("render_waveform: empty state");

  std::map<int, double> powers;
  for (const auto& [label, amp] : bins.terms()) powers[label.bin] += std::norm(amp);

  const double t_first = bins.t0() + powers.begin()->first * round_trip_time;
  const double t_last = bins.t0() + powers.rbegin()->first * round_trip_time;
  const double margin = params.padding * params.pulse_fwhm;
  const bool explicit_window =
      std::isfinite(params.window_start) && std::isfinite(params.window_end);
  const double start = explicit_window ? params.window_start : t_first - margin;
  const double stop = explicit_window ? params.window_end : t_last + margin;
  if (!(stop > start)) throw std::invalid_argument("render_waveform: empty window");
  const auto n =
      static_cast<Eigen::Index>(std::ceil((stop - start) / params.sample_period) + 1);

  Waveform w;
  w.sample_period = params.sample_period;
  w.time = start + params.sample_period * Eigen::ArrayXd::LinSpaced(n, 0.0, double(n - 1));
  w.intensity = Eigen::ArrayXd::Zero(n);

  for (const auto& [bin, power] : powers) {
    const double center = bins.t0() + bin * round_trip_time;
    if (params.shape == PulseShape::Gaussian) {
      // exp(-4 ln2 (t-tc)^2 / fwhm^2), normalized to unit area.
      const double height = power / (params.pulse_fwhm * std::sqrt(kPi / (4.0 * kLn2)));
      const double scale = 4.0 * kLn2 / (params.pulse_fwhm * params.pulse_fwhm);
      w.intensity += height * (-(w.time - center).square() * scale).exp();
    } else {
      // Flat top with fractional coverage at the edge samples, so the
      // integral stays exact on the grid.
      const double height = power / params.pulse_fwhm;
      const double lo = center - 0.5 * params.pulse_fwhm;
      const double hi = center + 0.5 * params.pulse_fwhm;
      const double half_cell = 0.5 * params.sample_period;
      for (Eigen::Index i = 0; i < w.intensity.size(); ++i) {
        const double cell_lo = w.time[i] - half_cell;
        const double cell_hi = w.time[i] + half_cell;
        const double covered =
            std::max(0.0, std::min(cell_hi, hi) - std::max(cell_lo, lo));
        w.intensity[i] += height * covered / params.sample_period;
      }
    }
  }

  if (params.bandwidth_hz > 0.0) {
    // Zero-phase single pole (forward and backward pass): the detector
    // bandwidth shapes the trace without displacing the peaks.
    const double tau = 1.0 / (2.0 * kPi * params.bandwidth_hz);
    const double alpha = params.sample_period / (tau + params.sample_period);
    double y = 0.0;
    for (Eigen::Index i = 0; i < w.intensity.size(); ++i) {
      y += alpha * (w.intensity[i] - y);
      w.intensity[i] = y;
    }
    y = 0.0;
    for (Eigen::Index i = w.intensity.size(); i-- > 0;) {
      y += alpha * (w.intensity[i] - y);
      w.intensity[i] = y;
    }
  }
  return w;
}

CrosstalkTable crosstalk_table(const EfficiencyMatrix& m, double floor_db) {
  const int n = m.size();
  CrosstalkTable table;
  table.direction = m.direction;
  table.before.resize(n);
  table.after.resize(n);

  double sum_db = 0.0;
  int counted = 0;
  auto classify = [&](int i, int j) {
    CrosstalkEntry e;
    if (j < 0 || j >= n) {
      e.kind = CrosstalkEntry::Kind::Undefined;
      return e;
    }
    const double diag = m.values(i, i);
    if (!(diag > 0.0)) {
      throw std::invalid_argument("crosstalk_table: zero diagonal at input " +
                                  std::to_string(i));
    }
    const double ratio = m.values(i, j) / diag;
    const double db = ratio > 0.0 ? 10.0 * std::log10(ratio)
                                  : -std::numeric_limits<double>::infinity();
    if (db <= floor_db) {
      e.kind = CrosstalkEntry::Kind::BelowFloor;
      e.db = floor_db;
    } else {
      e.kind = CrosstalkEntry::Kind::Value;
      e.db = db;
      sum_db += db;
      ++counted;
    }
    return e;
  };

  for (int i = 0; i < n; ++i) {
    table.before[i] = classify(i, i - 1);
    table.after[i] = classify(i, i + 1);
  }
  table.counted = counted;
  if (counted > 0) table.mean_db = sum_db / counted;
  return table;
}

double visibility(double i_max, double i_min) {
  if (!(i_max >= i_min && i_min >= 0.0)) {
    throw std::invalid_argument("visibility: need I_max >= I_min >= 0");
  }
  const double sum = i_max + i_min;
  if (!(sum > 0.0)) throw std::invalid_argument("visibility: I_max + I_min must be > 0");
  return (i_max - i_min) / sum;
}

namespace {

/// Bin whose intensity swings the most over the sweep.
int interference_bin(const std::vector<MzReadoutPoint>& sweep) {
  if (sweep.empty()) throw std::invalid_argument("empty readout sweep");
  std::map<int, std::pair<double, double>> ranges;  // bin -> (min, max)
  for (const auto& point : sweep) {
    for (const auto& [bin, power] : point.bin_powers) {
      auto [it, fresh] = ranges.try_emplace(bin, power, power);
      it->second.first = std::min(it->second.first, power);
      it->second.second = std::max(it->second.second, power);
    }
  }
  int best = ranges.begin()->first;
  double best_swing = -1.0;
  for (const auto& [bin, range] : ranges) {
    const double swing = range.second - range.first;
    if (swing > best_swing) {
      best_swing = swing;
      best = bin;
    }
  }
  return best;
}

}  // namespace

double visibility_from_sweep(const std::vector<MzReadoutPoint>& sweep) {
  const int bin = interference_bin(sweep);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& point : sweep) {
    const auto it = point.bin_powers.find(bin);
    const double p = it == point.bin_powers.end() ? 0.0 : it->second;
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return visibility(hi, lo);
}

double fringe_phase_from_sweep(const std::vector<MzReadoutPoint>& sweep) {
  const int bin = interference_bin(sweep);
  Complex harmonic(0.0, 0.0);
  for (const auto& point : sweep) {
    const auto it = point.bin_powers.find(bin);
    const double p = it == point.bin_powers.end() ? 0.0 : it->second;
    harmonic += p * std::polar(1.0, point.phase);
  }
  return std::arg(harmonic);
}

double projective_measurement(const PulseState& output, int target_l, const SlmParams& slm,
                              const FibreCouplerParams& coupler) {
  SlmParams flatten = slm;
  flatten.pattern_charge = -target_l;
  return total_power(fibre_coupler(slm_fork(output, flatten), coupler));
}

double projective_measurement(const PulseState& output, const PulseState& target,
                              double efficiency) {
  return std::norm(overlap(target, output)) * efficiency;
}

PulseState superposition_target(int charge_i, int charge_j, double phase) {
  const double inv = 1.0 / std::sqrt(2.0);
  return superpose({{{Polarization::H, charge_i, 0, 0}, Complex(inv, 0.0)},
                    {{Polarization::H, charge_j, 0, 0}, std::polar(inv, phase)}});
}

PulseState loss_compensated(const PulseState& s, double gamma, IndexKind kind) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("loss_compensated: gamma must be >= 1");
  if (s.empty()) throw std::invalid_argument("loss_compensated: empty state");
  std::vector<std::pair<ModeLabel, Complex>> scaled;
  scaled.reserve(s.size());
  double power = 0.0;
  for (const auto& [label, amp] : s.terms()) {
    const int index = std::abs(kind == IndexKind::Bin ? label.bin : label.l);
    const Complex a = amp * std::pow(gamma, 0.5 * index);
    scaled.emplace_back(label, a);
    power += std::norm(a);
  }
  StateBuilder b(s.t0(), s.prune_threshold());
  const double inv = 1.0 / std::sqrt(power);
  for (const auto& [label, amp] : scaled) b.add(label, amp * inv);
  return b.finish();
}

std::map<int, double> bin_distribution(const PulseState& s) {
  std::map<int, double> dist;
  double total = 0.0;
  for (const auto& [label, amp] : s.terms()) {
    dist[label.bin] += std::norm(amp);
    total += std::norm(amp);
  }
  if (!(total > 0.0)) throw std::invalid_argument("bin_distribution: empty state");
  for (auto& [bin, p] : dist) p /= total;
  return dist;
}

std::map<int, double> charge_distribution(const PulseState& s) {
  std::map<int, double> dist;
  double total = 0.0;
  for (const auto& [label, amp] : s.terms()) {
    dist[label.l] += std::norm(amp);
    total += std::norm(amp);
  }
  if (!(total > 0.0)) throw std::invalid_argument("charge_distribution: empty state");
  for (auto& [l, p] : dist) p /= total;
  return dist;
}

}  // namespace stt
