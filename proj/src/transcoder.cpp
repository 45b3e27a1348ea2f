#include "stt/transcoder.hpp"

#include <algorithm>
#include <cmath>

namespace stt {

namespace {

/// Per-loop intensity factors pulled out of the chain by component name, so
/// the trace can attribute power to the named stages. Anything unnamed lands
/// in `other`. The product of all factors times the reentry coupling equals
/// per_loop_transmission exactly.
struct ChainFactors {
  double qwp = 1.0;
  double vpp = 1.0;
  double four_f = 1.0;
  double eom = 1.0;
  double other = 1.0;
  double coupling = 1.0;

  double loop_total() const { return qwp * vpp * four_f * eom * other * coupling; }
};

double component_factor(const ChainComponent& c) {
  return std::pow(c.transmission, c.passes_per_loop);
}

ChainFactors resolve_chain(const LoopParams& loop) {
  ChainFactors f;
  f.coupling = loop.reentry_coupling;
  for (const auto& c : loop.chain) {
    const double t = component_factor(c);
    if (c.name == "qwp") {
      f.qwp *= t;
    } else if (c.name == "vpp") {
      f.vpp *= t;
    } else if (c.name == "four_f" || c.name == "4f") {
      f.four_f *= t;
    } else if (c.name == "eom") {
      f.eom *= t;
    } else {
      f.other *= t;
    }
  }
  return f;
}

/// Circulating field: sparse amplitude map plus the set of terms that were
/// just resonantly reflected and must come back carrying the scatter charge.
struct Circulation {
  std::map<ModeLabel, Complex> normal;
  std::map<ModeLabel, Complex> scatter_pending;

  bool empty() const { return normal.empty() && scatter_pending.empty(); }

  double power() const {
    double p = 0.0;
    for (const auto& [label, amp] : normal) p += std::norm(amp);
    for (const auto& [label, amp] : scatter_pending) p += std::norm(amp);
    return p;
  }
};

void prune_map(std::map<ModeLabel, Complex>& m, double threshold, double& pruned) {
  for (auto it = m.begin(); it != m.end();) {
    if (std::norm(it->second) < threshold) {
      pruned += std::norm(it->second);
      it = m.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace

void validate(const LoopParams& p) {
  if (!(p.round_trip_time > 0.0)) {
    throw std::invalid_argument("loop.round_trip_time must be > 0");
  }
  if (p.max_loops < 1) throw std::invalid_argument("loop.max_loops must be >= 1");
  if (!(p.reentry_coupling >= 0.0 && p.reentry_coupling <= 1.0)) {
    throw std::invalid_argument("loop.reentry_coupling must lie in [0, 1]");
  }
  if (!(p.vpp_unshifted_fraction >= 0.0 && p.vpp_unshifted_fraction < 1.0)) {
    throw std::invalid_argument("loop.vpp_unshifted_fraction must lie in [0, 1)");
  }
  if (p.vpp_charge_step != 1 && p.vpp_charge_step != -1) {
    throw std::invalid_argument("loop.vpp_charge_step must be +1 or -1");
  }
  if (!(p.eom_gate_width > 0.0 && p.eom_gate_width < p.round_trip_time)) {
    throw std::invalid_argument("loop.eom_gate_width must lie in (0, round_trip_time)");
  }
  for (const auto& c : p.chain) {
    if (!(c.transmission >= 0.0 && c.transmission <= 1.0)) {
      throw std::invalid_argument("loop.chain '" + c.name +
                                  "' transmission must lie in [0, 1]");
    }
    if (c.passes_per_loop < 1) {
      throw std::invalid_argument("loop.chain '" + c.name + "' passes_per_loop must be >= 1");
    }
  }
  for (std::size_t i = 0; i < p.manual_gate_windows.size(); ++i) {
    const GateWindow& w = p.manual_gate_windows[i];
    if (!(w.end > w.start)) {
      throw std::invalid_argument("loop.gate_windows_ns entries must have end > start");
    }
    if (i > 0 && !(w.start >= p.manual_gate_windows[i - 1].end)) {
      throw std::invalid_argument("loop.gate_windows_ns must be sorted and non-overlapping");
    }
  }
}

double per_loop_transmission(const LoopParams& p) {
  if (p.chain.empty()) throw std::invalid_argument("per_loop_transmission: empty chain");
  double t = 1.0;
  for (const auto& c : p.chain) t *= component_factor(c);
  return t * p.reentry_coupling;
}

double circulation_loss_gamma(const LoopParams& p) {
  const double t = per_loop_transmission(p);
  if (!(t > 0.0)) throw std::invalid_argument("circulation_loss_gamma: zero per-loop transmission");
  return 1.0 / t;
}

std::vector<GateWindow> expand_gate_schedule(const EomSchedule& schedule,
                                             double round_trip_time, int max_loops) {
  if (!(schedule.window > 0.0 && schedule.window < round_trip_time)) {
    throw std::invalid_argument("eom schedule: window must lie in (0, round_trip_time)");
  }
  std::vector<GateWindow> windows;
  if (schedule.mode == Direction::Reverse) {
    windows.push_back({schedule.trigger_time - 0.5 * schedule.window,
                       schedule.trigger_time + 0.5 * schedule.window});
    return windows;
  }
  windows.reserve(max_loops);
  for (int k = 0; k < max_loops; ++k) {
    const double center = schedule.trigger_time + k * round_trip_time;
    windows.push_back({center - 0.5 * schedule.window, center + 0.5 * schedule.window});
  }
  return windows;
}

std::vector<GateWindow> make_gate_windows(const LoopParams& p, Direction direction) {
  if (!p.manual_gate_windows.empty()) return p.manual_gate_windows;
  EomSchedule schedule;
  schedule.mode = direction;
  schedule.window = p.eom_gate_width;
  schedule.trigger_time =
      direction == Direction::Forward ? p.t0 + 0.5 * p.round_trip_time : p.t0;
  return expand_gate_schedule(schedule, p.round_trip_time, p.max_loops);
}

double RunResult::total_loss() const {
  double sum = 0.0;
  for (const auto& [channel, power] : losses) sum += power;
  return sum;
}

RunResult run_forward(const TranscoderParams& params, const PulseState& input) {
  validate(params.cavity);
  validate(params.loop);
  const LoopParams& loop = params.loop;
  const double T = loop.round_trip_time;
  const double t0 = loop.t0;

  for (const auto& [label, amp] : input.terms()) {
    if (label.bin != 0) {
      throw std::invalid_argument("run_forward: input terms must sit at bin 0");
    }
    if (label.l < 0) {
      throw std::invalid_argument("run_forward: negative charge " + std::to_string(label.l) +
                                  " is outside the loop's operating range");
    }
    if (label.l > loop.max_loops) {
      throw std::invalid_argument("run_forward: charge " + std::to_string(label.l) +
                                  " exceeds max_loops");
    }
    if (label.pol != Polarization::H) {
      throw std::invalid_argument("run_forward: input must be H-polarized");
    }
  }

  const ChainFactors chain = resolve_chain(loop);
  const std::vector<GateWindow> gates = make_gate_windows(loop, Direction::Forward);
  const EomParams eom_gate{1.0, gates};

  RunResult result;
  result.input_power = total_power(input);
  SimulationTrace& trace = result.trace;
  auto& losses = result.losses;
  losses["cavity_absorption"] = 0.0;
  losses["coupler_rejection"] = 0.0;
  losses["eom_misroute"] = 0.0;
  losses["loop_attenuation"] = 0.0;
  losses["pruned"] = 0.0;
  losses["unconverted_residual"] = 0.0;
  // Same-label branches (a conversion-purity leak meeting the next charge
  // down) merge coherently; the power the cross terms move relative to the
  // branch-by-branch books is ledgered so the balance always closes.
  losses["branch_interference"] = 0.0;

  Circulation circ;
  for (const auto& [label, amp] : input.terms()) {
    circ.normal[{Polarization::H, label.l, label.p, 0}] += amp;
  }

  StateBuilder out(t0, input.prune_threshold());
  double out_branch_power = 0.0;

  const double amp_chain = std::sqrt(chain.loop_total());
  const double keep = std::sqrt(1.0 - loop.vpp_unshifted_fraction);
  const double leak = std::sqrt(loop.vpp_unshifted_fraction);

  for (int k = 0; k <= loop.max_loops && !circ.empty(); ++k) {
    const double t_arrival = t0 + k * T;
    trace.events.push_back({t_arrival, "cavity", circ.power()});

    // Cavity interaction: transmitted light heads to the collection fibre,
    // reflected light re-enters the loop. The resonant remainder is flagged
    // so it returns carrying the scatter charge instead of a VPP shift.
    std::vector<std::pair<ModeLabel, Complex>> reflected_normal;
    std::vector<std::pair<ModeLabel, Complex>> reflected_scatter;
    double transmitted_power = 0.0;
    auto interact = [&](const ModeLabel& label, Complex amp, bool came_from_scatter) {
      const ModeResponse resp = mode_response(params.cavity, label);
      const Complex at = amp * resp.t;
      const Complex ar = amp * resp.r;
      losses["cavity_absorption"] +=
          std::norm(amp) * std::max(0.0, 1.0 - resp.transmission() - resp.reflection());

      if (std::norm(at) > 0.0) {
        transmitted_power += std::norm(at);
        const bool fundamental = label.l == 0 && label.p == 0;
        const double coupled = fundamental
                                   ? params.output_coupler.efficiency
                                   : params.output_coupler.efficiency *
                                         params.output_coupler.extinction;
        if (coupled > 0.0) {
          out.add({Polarization::H, label.l, label.p, k}, at * std::sqrt(coupled));
          out_branch_power += std::norm(at) * coupled;
        }
        losses["coupler_rejection"] += std::norm(at) * (1.0 - coupled);
      }
      if (std::norm(ar) > 0.0) {
        const bool resonant = label.l == 0 && label.p == 0;
        if (k == loop.max_loops) {
          losses["unconverted_residual"] += std::norm(ar);
        } else if (resonant && !came_from_scatter) {
          reflected_scatter.emplace_back(label, ar);
        } else {
          reflected_normal.emplace_back(label, ar);
        }
      }
    };
    for (const auto& [label, amp] : circ.normal) interact(label, amp, false);
    for (const auto& [label, amp] : circ.scatter_pending) interact(label, amp, true);
    circ.normal.clear();
    circ.scatter_pending.clear();
    if (transmitted_power > 0.0) {
      trace.events.push_back({t_arrival, "coupler", transmitted_power});
    }
    if (k == loop.max_loops) break;
    if (reflected_normal.empty() && reflected_scatter.empty()) break;

    // One round trip back to the cavity. Polarization is restored to H by
    // the QWP double pass / gated EOM pair, and the loop closes with an even
    // number of reflections, so the two sign inversions of the charge cancel
    // within the trip and only the VPP shift survives. Light the gate misses
    // would be misrouted at the polarizing splitters and is dropped as loss.
    double p_loop = 0.0;
    for (const auto& [label, amp] : reflected_normal) p_loop += std::norm(amp);
    for (const auto& [label, amp] : reflected_scatter) p_loop += std::norm(amp);
    const double t_eom = t_arrival + 0.5 * T;
    const bool gate_open = eom_gate_open(t_eom, eom_gate);

    trace.events.push_back({t_arrival + 0.10 * T, "qwp", p_loop * chain.qwp});
    trace.events.push_back(
        {t_arrival + 0.25 * T, "vpp", p_loop * chain.qwp * chain.vpp});
    trace.events.push_back(
        {t_arrival + 0.40 * T, "four_f", p_loop * chain.qwp * chain.vpp * chain.four_f});
    const double p_chain = p_loop * chain.qwp * chain.vpp * chain.four_f * chain.other;
    trace.events.push_back({t_arrival + 0.45 * T, "loop_optics", p_chain});
    trace.events.push_back(
        {t_eom, "eom", gate_open ? p_chain * chain.eom : 0.0});
    trace.events.push_back({t_arrival + 0.75 * T, "reentry", p_loop * chain.loop_total()});

    losses["loop_attenuation"] += p_loop * (1.0 - chain.loop_total());
    if (!gate_open) {
      losses["eom_misroute"] += p_loop * chain.loop_total();
      continue;
    }

    for (const auto& [label, amp] : reflected_normal) {
      const Complex a = amp * amp_chain;
      ModeLabel next = label;
      next.bin = k + 1;
      ModeLabel shifted = next;
      shifted.l += loop.vpp_charge_step;  // forward VPP pass
      circ.normal[shifted] += a * keep;
      if (leak > 0.0) circ.normal[next] += a * leak;
    }
    for (const auto& [label, amp] : reflected_scatter) {
      ModeLabel next = label;
      next.bin = k + 1;
      next.l = loop.scatter_charge;
      circ.scatter_pending[next] += amp * amp_chain;
    }
    losses["branch_interference"] += p_loop * chain.loop_total() - circ.power();
    prune_map(circ.normal, input.prune_threshold(), losses["pruned"]);
    prune_map(circ.scatter_pending, input.prune_threshold(), losses["pruned"]);
  }

  double pruned = 0.0;
  result.output = out.finish(&pruned);
  losses["pruned"] += pruned;
  losses["branch_interference"] +=
      out_branch_power - total_power(result.output) - pruned;
  return result;
}

RunResult run_reverse(const TranscoderParams& params, const PulseState& input) {
  validate(params.cavity);
  validate(params.loop);
  const LoopParams& loop = params.loop;
  const double T = loop.round_trip_time;
  const double t0 = loop.t0;

  int earliest = 0;
  for (const auto& [label, amp] : input.terms()) {
    if (label.bin > 0) {
      throw std::invalid_argument("run_reverse: input bins must not be later than t0");
    }
    if (-label.bin > loop.max_loops) {
      throw std::invalid_argument("run_reverse: bin " + std::to_string(label.bin) +
                                  " needs more loops than max_loops allows");
    }
    if (label.l != 0) {
      throw std::invalid_argument("run_reverse: input must be fundamental-mode (l = 0)");
    }
    if (label.pol != Polarization::H) {
      throw std::invalid_argument("run_reverse: input must be H-polarized");
    }
    earliest = std::max(earliest, -label.bin);
  }

  const ChainFactors chain = resolve_chain(loop);
  const std::vector<GateWindow> gates = make_gate_windows(loop, Direction::Reverse);
  const EomParams eom_gate{1.0, gates};

  RunResult result;
  result.input_power = total_power(input);
  SimulationTrace& trace = result.trace;
  auto& losses = result.losses;
  losses["cavity_absorption"] = 0.0;
  losses["cavity_entry_reflection"] = 0.0;
  losses["cavity_leak"] = 0.0;
  losses["eom_misroute"] = 0.0;
  losses["loop_attenuation"] = 0.0;
  losses["pruned"] = 0.0;
  losses["branch_interference"] = 0.0;

  Circulation circ;
  StateBuilder out(t0, input.prune_threshold());
  double out_branch_power = 0.0;

  const double amp_chain = std::sqrt(chain.loop_total());
  const double keep = std::sqrt(1.0 - loop.vpp_unshifted_fraction);
  const double leak = std::sqrt(loop.vpp_unshifted_fraction);

  auto inject = [&](int m) {
    const double t_now = t0 - m * T;
    for (const auto& [label, amp] : input.terms()) {
      if (label.bin != -m) continue;
      const ModeResponse resp =
          mode_response(params.cavity, {Polarization::H, 0, label.p, 0});
      const Complex at = amp * resp.t;
      losses["cavity_entry_reflection"] += std::norm(amp) * resp.reflection();
      losses["cavity_absorption"] +=
          std::norm(amp) * std::max(0.0, 1.0 - resp.transmission() - resp.reflection());
      if (std::norm(at) > 0.0) {
        circ.normal[{Polarization::V, 0, label.p, 0}] += at;
        trace.events.push_back({t_now, "input", std::norm(at)});
      }
    }
  };

  for (int m = earliest; m >= 1; --m) {
    inject(m);
    if (circ.empty()) continue;
    const double t_start = t0 - m * T;

    // Round trip toward the next arrival: backward VPP pass raises the
    // charge; scatter-flagged remainders come back at the scatter charge.
    const double p_loop = circ.power();
    trace.events.push_back({t_start + 0.10 * T, "qwp", p_loop * chain.qwp});
    trace.events.push_back({t_start + 0.25 * T, "vpp", p_loop * chain.qwp * chain.vpp});
    trace.events.push_back(
        {t_start + 0.40 * T, "four_f", p_loop * chain.qwp * chain.vpp * chain.four_f});
    trace.events.push_back(
        {t_start + 0.45 * T, "loop_optics",
         p_loop * chain.qwp * chain.vpp * chain.four_f * chain.other});
    trace.events.push_back({t_start + 0.75 * T, "reentry", p_loop * chain.loop_total()});
    losses["loop_attenuation"] += p_loop * (1.0 - chain.loop_total());

    Circulation next;
    for (const auto& [label, amp] : circ.normal) {
      const Complex a = amp * amp_chain;
      ModeLabel shifted = label;
      shifted.l -= loop.vpp_charge_step;  // backward VPP pass
      next.normal[shifted] += a * keep;
      if (leak > 0.0) next.normal[label] += a * leak;
    }
    for (const auto& [label, amp] : circ.scatter_pending) {
      ModeLabel tagged = label;
      tagged.l = loop.scatter_charge;
      next.normal[tagged] += amp * amp_chain;
    }
    losses["branch_interference"] += p_loop * chain.loop_total() - next.power();
    circ = std::move(next);

    const double t_arrival = t0 - (m - 1) * T;
    if (m - 1 >= 1) {
      // Mid-train cavity encounter: nonzero charges reflect and stay in the
      // loop; anything resonant partially leaks out through the cavity.
      trace.events.push_back({t_arrival, "cavity", circ.power()});
      Circulation kept;
      for (const auto& [label, amp] : circ.normal) {
        const ModeResponse resp = mode_response(params.cavity, label);
        const Complex ar = amp * resp.r;
        losses["cavity_leak"] += std::norm(amp) * resp.transmission();
        losses["cavity_absorption"] +=
            std::norm(amp) * std::max(0.0, 1.0 - resp.transmission() - resp.reflection());
        if (std::norm(ar) == 0.0) continue;
        if (label.l == 0 && label.p == 0) {
          kept.scatter_pending[label] += ar;
        } else {
          kept.normal[label] += ar;
        }
      }
      circ = std::move(kept);
      prune_map(circ.normal, input.prune_threshold(), losses["pruned"]);
      prune_map(circ.scatter_pending, input.prune_threshold(), losses["pruned"]);
    }
  }

  // Release at t0: the gated EOM flips the train to H and PBS 1 passes it
  // out as a single pulse carrying the accumulated charges.
  const bool release_open = eom_gate_open(t0, eom_gate);
  const double p_release = circ.power();
  trace.events.push_back({t0, "eom", release_open ? p_release : 0.0});
  if (!release_open) {
    losses["eom_misroute"] += p_release;
  } else {
    for (const auto& [label, amp] : circ.normal) {
      out.add({Polarization::H, label.l, label.p, 0}, amp);
      out_branch_power += std::norm(amp);
    }
    for (const auto& [label, amp] : circ.scatter_pending) {
      out.add({Polarization::H, label.l, label.p, 0}, amp);
      out_branch_power += std::norm(amp);
    }
  }

  // Pulses arriving exactly at the release time pass straight through.
  for (const auto& [label, amp] : input.terms()) {
    if (label.bin != 0) continue;
    const ModeResponse resp = mode_response(params.cavity, {Polarization::H, 0, label.p, 0});
    const Complex at = amp * resp.t;
    losses["cavity_entry_reflection"] += std::norm(amp) * resp.reflection();
    losses["cavity_absorption"] +=
        std::norm(amp) * std::max(0.0, 1.0 - resp.transmission() - resp.reflection());
    if (std::norm(at) > 0.0) {
      trace.events.push_back({t0, "input", std::norm(at)});
      if (release_open) {
        out.add({Polarization::H, 0, label.p, 0}, at);
        out_branch_power += std::norm(at);
      } else {
        losses["eom_misroute"] += std::norm(at);
      }
    }
  }

  std::sort(trace.events.begin(), trace.events.end(),
            [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });

  double pruned = 0.0;
  result.output = out.finish(&pruned);
  losses["pruned"] += pruned;
  losses["branch_interference"] +=
      out_branch_power - total_power(result.output) - pruned;
  return result;
}

PulseState as_reverse_input(const PulseState& forward_output) {
  StateBuilder b(forward_output.t0(), forward_output.prune_threshold());
  for (const auto& [label, amp] : forward_output.terms()) {
    ModeLabel mirrored = label;
    mirrored.bin = -label.bin;
    b.add(mirrored, amp);
  }
  return b.finish();
}

void validate(const MzParams& p) {
  if (!(p.arm_delay > 0.0)) throw std::invalid_argument("mz.arm_delay must be > 0");
  if (!(p.splitting >= 0.0 && p.splitting <= 1.0)) {
    throw std::invalid_argument("mz.splitting must lie in [0, 1]");
  }
  if (!(p.arm_loss >= 0.0 && p.arm_loss <= 1.0)) {
    throw std::invalid_argument("mz.arm_loss must lie in [0, 1]");
  }
  if (!(p.coherence >= 0.0 && p.coherence <= 1.0)) {
    throw std::invalid_argument("mz.coherence must lie in [0, 1]");
  }
}

namespace {

int delay_bins(const MzParams& mz, double round_trip_time) {
  const double ratio = mz.arm_delay / round_trip_time;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
    throw std::invalid_argument(
        "mz.arm_delay must be an integer multiple of the round-trip time");
  }
  return static_cast<int>(rounded);
}

}  // namespace

PulseState mz_prepare(const PulseState& input, const MzParams& mz, double round_trip_time) {
  validate(mz);
  const int delta = delay_bins(mz, round_trip_time);
  const double short_amp = std::sqrt(mz.splitting);
  const Complex long_amp =
      std::polar(std::sqrt((1.0 - mz.splitting) * mz.arm_loss), mz.relative_phase);
  StateBuilder b(input.t0(), input.prune_threshold());
  for (const auto& [label, amp] : input.terms()) {
    b.add(label, amp * short_amp);
    ModeLabel delayed = label;
    delayed.bin += delta;
    b.add(delayed, amp * long_amp);
  }
  return b.finish();
}

std::vector<MzReadoutPoint> mz_readout(const PulseState& output, const MzParams& mz,
                                       std::span<const double> phase_sweep,
                                       double round_trip_time) {
  validate(mz);
  const int delta = delay_bins(mz, round_trip_time);

  bool has_pair = false;
  for (const auto& [label, amp] : output.terms()) {
    ModeLabel partner = label;
    partner.bin += delta;
    if (output.terms().contains(partner)) {
      has_pair = true;
      break;
    }
  }
  if (!has_pair) {
    throw std::invalid_argument("mz_readout: no populated bins separated by the arm delay");
  }

  std::vector<MzReadoutPoint> points;
  points.reserve(phase_sweep.size());
  const double short_amp = std::sqrt(mz.splitting);
  const double long_mag = std::sqrt((1.0 - mz.splitting) * mz.arm_loss);
  for (const double phase : phase_sweep) {
    const Complex long_amp = std::polar(long_mag, phase);
    MzReadoutPoint point;
    point.phase = phase;
    // Per label: the short-arm copy of bin k meets the long-arm copy of bin
    // k - delta. The cross term carries the configured mutual coherence.
    for (const auto& [label, amp] : output.terms()) {
      const Complex s = amp * short_amp;
      ModeLabel early = label;
      early.bin -= delta;
      const Complex g = output.amplitude(early) * long_amp;
      point.bin_powers[label.bin] +=
          std::norm(s) + std::norm(g) + 2.0 * mz.coherence * (std::conj(s) * g).real();
      // Long-arm copies landing past the last populated bin.
      ModeLabel late = label;
      late.bin += delta;
      if (!output.terms().contains(late)) {
        point.bin_powers[late.bin] += std::norm(amp) * long_mag * long_mag;
      }
    }
    points.push_back(std::move(point));
  }
  return points;
}

EfficiencyMatrix conversion_matrix(const TranscoderParams& params, Direction direction,
                                   int l_range) {
  if (l_range < 1) throw std::invalid_argument("conversion_matrix: l_range must be >= 1");
  if (l_range - 1 > params.loop.max_loops) {
    throw std::invalid_argument("conversion_matrix: l_range exceeds max_loops");
  }
  EfficiencyMatrix m;
  m.direction = direction;
  m.values = Eigen::MatrixXd::Zero(l_range, l_range);
  for (int i = 0; i < l_range; ++i) {
    if (direction == Direction::Forward) {
      const PulseState in = PulseState::basis({Polarization::H, i, 0, 0}, params.loop.t0);
      const RunResult run = run_forward(params, in);
      for (int j = 0; j < l_range; ++j) m.values(i, j) = power_in_bin(run.output, j);
    } else {
      const PulseState in = PulseState::basis({Polarization::H, 0, 0, -i}, params.loop.t0);
      const RunResult run = run_reverse(params, in);
      for (int j = 0; j < l_range; ++j) m.values(i, j) = power_in_charge(run.output, j);
    }
  }
  return m;
}

}  // namespace stt
