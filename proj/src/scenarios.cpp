#include "stt/scenarios.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace stt {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Collects emitted files and writes the manifest last, so nothing escapes
/// the listing.
class Emitter {
 public:
  explicit Emitter(const RunConfig& config) : config_(config), dir_(config.output_dir) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    files_.push_back(name);
  }

  std::string finish(const json& summary) {
    json manifest;
    manifest["scenario"] = scenario_name(config_.scenario);
    manifest["profile"] = config_.profile;
    manifest["seed"] = config_.seed;
    manifest["files"] = files_;
    manifest["summary"] = summary;
    const std::string text = manifest.dump(2) + "\n";
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << text;
    return summary.dump(2);
  }

 private:
  const RunConfig& config_;
  fs::path dir_;
  std::vector<std::string> files_;
};

TranscoderParams engine_params(const RunConfig& c) { return c.transcoder; }

json losses_json(const RunResult& run) {
  json j;
  for (const auto& [channel, power] : run.losses) j[channel] = power;
  return j;
}

std::string trace_jsonl(const std::string& tag, int index, const RunResult& run) {
  std::ostringstream out;
  for (const auto& event : run.trace.events) {
    json line;
    line[tag] = index;
    line["t_ns"] = event.time * 1e9;
    line["element"] = event.element;
    line["power"] = event.power;
    out << line.dump() << "\n";
  }
  return out.str();
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string matrix_csv(const std::string& row_label, const std::string& col_prefix,
                       const Eigen::MatrixXd& m) {
  std::ostringstream out;
  out << row_label;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << "," << col_prefix << j;
  out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << "," << fmt(m(i, j));
    out << "\n";
  }
  return out.str();
}

/// dB matrix relative to the timing-law diagonal, floored for reporting.
json crosstalk_db_matrix(const EfficiencyMatrix& m, double floor_db) {
  json rows = json::array();
  for (int i = 0; i < m.size(); ++i) {
    json row = json::array();
    const double diag = m.values(i, i);
    for (int j = 0; j < m.size(); ++j) {
      if (!(diag > 0.0) || !(m.values(i, j) > 0.0)) {
        row.push_back(floor_db);
        continue;
      }
      row.push_back(std::max(floor_db, 10.0 * std::log10(m.values(i, j) / diag)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json table_json(const CrosstalkTable& table) {
  auto entry_json = [](const CrosstalkEntry& e) -> json {
    switch (e.kind) {
      case CrosstalkEntry::Kind::Undefined: return "*";
      case CrosstalkEntry::Kind::BelowFloor: return "below_floor";
      case CrosstalkEntry::Kind::Value: return e.db;
    }
    return "*";
  };
  json j;
  j["direction"] = table.direction == Direction::Forward ? "forward" : "reverse";
  const char* early = table.direction == Direction::Forward ? "t(l)-T" : "l(t)-1";
  const char* late = table.direction == Direction::Forward ? "t(l)+T" : "l(t)+1";
  json before = json::array();
  json after = json::array();
  for (int i = 0; i < table.size(); ++i) {
    before.push_back(entry_json(table.before[i]));
    after.push_back(entry_json(table.after[i]));
  }
  j[early] = std::move(before);
  j[late] = std::move(after);
  if (table.mean_db) {
    j["mean_db"] = *table.mean_db;
  } else {
    j["mean_db"] = nullptr;
  }
  j["entries_in_mean"] = table.counted;
  return j;
}

PulseState conversion_input(const RunConfig& c, Direction direction) {
  if (!c.input.state_file.empty()) {
    std::ifstream in(c.input.state_file);
    if (!in) throw std::invalid_argument("cannot open input.state_file " + c.input.state_file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return state_from_json(buffer.str());
  }
  StateBuilder b(c.transcoder.loop.t0);
  if (direction == Direction::Forward) {
    const double amp = 1.0 / std::sqrt(double(c.input.oam_modes.size()));
    for (int l : c.input.oam_modes) b.add({Polarization::H, l, 0, 0}, Complex(amp, 0.0));
  } else {
    const double amp = 1.0 / std::sqrt(double(c.input.bins.size()));
    for (int bin : c.input.bins) b.add({Polarization::H, 0, 0, bin}, Complex(amp, 0.0));
  }
  return b.finish();
}

json conversion_scenario(const RunConfig& c, Direction direction, Emitter& emitter) {
  const TranscoderParams params = engine_params(c);
  const std::vector<int> indices = direction == Direction::Forward
                                       ? c.input.oam_modes
                                       : std::vector<int>([&] {
                                           std::vector<int> v;
                                           for (int bin : c.input.bins) v.push_back(-bin);
                                           return v;
                                         }());
  int l_range = 1;
  for (int i : indices) l_range = std::max(l_range, i + 1);

  const char* input_tag = direction == Direction::Forward ? "input_l" : "input_bin";
  const char* output_tag = direction == Direction::Forward ? "bin" : "l";

  // Basis runs: one conversion per configured input index.
  std::vector<RunResult> runs;
  std::ostringstream bins_csv;
  std::ostringstream trace;
  bins_csv << input_tag << "," << output_tag << ",power,phase_rad\n";
  for (int index : indices) {
    const PulseState in =
        direction == Direction::Forward
            ? PulseState::basis({Polarization::H, index, 0, 0}, params.loop.t0)
            : PulseState::basis({Polarization::H, 0, 0, -index}, params.loop.t0);
    RunResult run = direction == Direction::Forward ? run_forward(params, in)
                                                    : run_reverse(params, in);
    std::map<int, Complex> marginal;
    for (const auto& [label, amp] : run.output.terms()) {
      marginal[direction == Direction::Forward ? label.bin : label.l] += amp;
    }
    for (const auto& [k, amp] : marginal) {
      bins_csv << index << "," << k << "," << fmt(std::norm(amp)) << ","
               << fmt(std::arg(amp)) << "\n";
    }
    trace << trace_jsonl(input_tag, index, run);
    runs.push_back(std::move(run));
  }
  emitter.write("bins.csv", bins_csv.str());
  emitter.write("trace.jsonl", trace.str());

  // Waveforms share one time base so the columns align.
  const double T = params.loop.round_trip_time;
  WaveformParams wf = c.analysis.waveform;
  int max_bin = 0;
  for (const auto& run : runs) {
    for (const auto& [label, amp] : run.output.terms()) {
      max_bin = std::max(max_bin, label.bin);
    }
  }
  wf.window_start = params.loop.t0 - wf.padding * wf.pulse_fwhm;
  wf.window_end = params.loop.t0 + max_bin * T + wf.padding * wf.pulse_fwhm;
  std::vector<Waveform> waveforms;
  for (const auto& run : runs) {
    if (direction == Direction::Forward) {
      waveforms.push_back(render_waveform(run.output, T, wf));
    } else {
      // Reverse outputs land in one temporal bin; render charge marginals as
      // the projective traces are recorded, one peak per configured input.
      waveforms.push_back(render_waveform(run.output.with_t0(params.loop.t0), T, wf));
    }
  }
  std::ostringstream wf_csv;
  wf_csv << "t_ns";
  for (int index : indices) wf_csv << "," << input_tag << "_" << index;
  wf_csv << "\n";
  if (!waveforms.empty()) {
    for (Eigen::Index s = 0; s < waveforms.front().time.size(); ++s) {
      wf_csv << fmt(waveforms.front().time[s] * 1e9);
      for (const auto& w : waveforms) wf_csv << "," << fmt(w.intensity[s]);
      wf_csv << "\n";
    }
  }
  emitter.write("waveform.csv", wf_csv.str());

  const EfficiencyMatrix matrix = conversion_matrix(params, direction, l_range);
  emitter.write("efficiency_matrix.csv",
                matrix_csv(input_tag, direction == Direction::Forward ? "bin_" : "l_",
                           matrix.values));
  const CrosstalkTable table = crosstalk_table(matrix, c.analysis.crosstalk_floor_db);

  // Combined run of the configured superposition (or explicit state file).
  const PulseState combined_in = conversion_input(c, direction);
  const RunResult combined = direction == Direction::Forward
                                 ? run_forward(params, combined_in)
                                 : run_reverse(params, combined_in);

  json summary;
  summary["gamma"] = circulation_loss_gamma(params.loop);
  summary["per_loop_transmission"] = per_loop_transmission(params.loop);
  json eff = json::array();
  for (int i = 0; i < matrix.size(); ++i) eff.push_back(matrix.values(i, i));
  summary["efficiencies"] = std::move(eff);
  summary["crosstalk_db"] = crosstalk_db_matrix(matrix, c.analysis.crosstalk_floor_db);
  summary["crosstalk_table"] = table_json(table);
  summary["combined_input_power"] = combined.input_power;
  summary["combined_output_power"] = total_power(combined.output);
  summary["combined_losses"] = losses_json(combined);
  return summary;
}

json cavity_spectrum_scenario(const RunConfig& c, Emitter& emitter) {
  const CavityParams& cavity = c.transcoder.cavity;
  const CavitySpectrum spectrum = make_spectrum(cavity);

  const int n = 2001;
  std::ostringstream csv;
  csv << "nu_hz,transmission\n";
  for (int i = 0; i < n; ++i) {
    const double nu = 2.0 * spectrum.fsr_hz * i / (n - 1);
    csv << fmt(nu) << "," << fmt(airy_transmission(cavity, nu)) << "\n";
  }
  emitter.write("spectrum.csv", csv.str());

  const int clean = max_clean_oam(spectrum, c.analysis.clean_oam_criterion);
  json summary;
  summary["finesse"] = spectrum.finesse;
  summary["fsr_hz"] = spectrum.fsr_hz;
  summary["fwhm_hz"] = spectrum.fwhm_hz;
  summary["gouy_factor"] = spectrum.gouy_factor;
  summary["max_clean_oam"] = clean;
  summary["clean_oam_criterion_fwhm"] = c.analysis.clean_oam_criterion;
  summary["expected_clean_oam"] = c.analysis.expected_clean_oam;
  summary["matches_expected"] = clean >= c.analysis.expected_clean_oam;
  return summary;
}

std::string pgm_from_grid(const IntensityGrid& grid) {
  const double peak = grid.values.maxCoeff();
  std::ostringstream out;
  out << "P2\n" << grid.n_angular() << " " << grid.n_radial() << "\n65535\n";
  for (int i = 0; i < grid.n_radial(); ++i) {
    for (int j = 0; j < grid.n_angular(); ++j) {
      const int v = peak > 0.0 ? static_cast<int>(65535.0 * grid.values(i, j) / peak) : 0;
      out << v << (j + 1 == grid.n_angular() ? "" : " ");
    }
    out << "\n";
  }
  return out.str();
}

json fringe_pattern_scenario(const RunConfig& c, Emitter& emitter) {
  json counts = json::array();
  std::ostringstream count_csv;
  count_csv << "l,fringes\n";
  for (int l = 0; l <= c.lg.max_fringe_charge; ++l) {
    const IntensityGrid grid = mirror_interference_pattern(c.lg.params, l, 0.0, c.lg.grid);
    std::ostringstream csv;
    csv << "r_m,alpha_rad,intensity\n";
    for (int i = 0; i < grid.n_radial(); ++i) {
      for (int j = 0; j < grid.n_angular(); ++j) {
        csv << fmt(grid.radius(i)) << "," << fmt(grid.angle(j)) << ","
            << fmt(grid.values(i, j)) << "\n";
      }
    }
    const std::string base = "fringe_l" + std::to_string(l);
    emitter.write(base + ".csv", csv.str());
    emitter.write(base + ".pgm", pgm_from_grid(grid));
    const int fringes = count_fringes(grid);
    count_csv << l << "," << fringes << "\n";
    counts.push_back({{"l", l}, {"fringes", fringes}});
  }
  emitter.write("fringe_counts.csv", count_csv.str());
  json summary;
  summary["fringes"] = std::move(counts);
  return summary;
}

json crosstalk_scenario(const RunConfig& c, Emitter& emitter) {
  const TranscoderParams params = engine_params(c);
  int l_range = 1;
  for (int l : c.input.oam_modes) l_range = std::max(l_range, l + 1);
  for (int bin : c.input.bins) l_range = std::max(l_range, -bin + 1);

  const EfficiencyMatrix forward = conversion_matrix(params, Direction::Forward, l_range);
  const EfficiencyMatrix reverse = conversion_matrix(params, Direction::Reverse, l_range);
  emitter.write("efficiency_forward.csv", matrix_csv("input_l", "bin_", forward.values));
  emitter.write("efficiency_reverse.csv", matrix_csv("input_bin", "l_", reverse.values));

  const CrosstalkTable table_f = crosstalk_table(forward, c.analysis.crosstalk_floor_db);
  const CrosstalkTable table_r = crosstalk_table(reverse, c.analysis.crosstalk_floor_db);
  json tables;
  tables["forward"] = table_json(table_f);
  tables["reverse"] = table_json(table_r);
  emitter.write("crosstalk_tables.json", tables.dump(2) + "\n");

  json summary;
  summary["forward_mean_db"] = table_f.mean_db ? json(*table_f.mean_db) : json(nullptr);
  summary["reverse_mean_db"] = table_r.mean_db ? json(*table_r.mean_db) : json(nullptr);
  summary["floor_db"] = c.analysis.crosstalk_floor_db;
  summary["matrix_forward"] = matrix_json(forward.values);
  summary["matrix_reverse"] = matrix_json(reverse.values);
  return summary;
}

json visibility_scenario(const RunConfig& c, Emitter& emitter) {
  const TranscoderParams params = engine_params(c);
  const double T = params.loop.round_trip_time;
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);

  // Forward coherence check: convert an equal two-mode superposition and
  // sweep the readout interferometer.
  const int l_a = c.input.oam_modes.size() > 0 ? c.input.oam_modes[0] : 0;
  const int l_b = c.input.oam_modes.size() > 1 ? c.input.oam_modes[1] : l_a + 1;
  const double inv = 1.0 / std::sqrt(2.0);
  const PulseState input =
      superpose({{{Polarization::H, l_a, 0, 0}, Complex(inv, 0.0)},
                 {{Polarization::H, l_b, 0, 0}, Complex(inv, 0.0)}},
                params.loop.t0);
  const RunResult run = run_forward(params, input);

  std::vector<double> phases(c.analysis.phase_sweep_points);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    phases[i] = 2.0 * std::numbers::pi * double(i) / double(phases.size());
  }
  std::vector<MzReadoutPoint> sweep = mz_readout(run.output, c.mz, phases, T);
  if (c.analysis.intensity_jitter_rms > 0.0) {
    for (auto& point : sweep) {
      const double scale =
          std::max(0.0, 1.0 + c.analysis.intensity_jitter_rms * jitter(rng));
      for (auto& [bin, power] : point.bin_powers) power *= scale;
    }
  }

  std::set<int> bins;
  for (const auto& point : sweep) {
    for (const auto& [bin, power] : point.bin_powers) bins.insert(bin);
  }
  std::ostringstream csv;
  csv << "phase_rad";
  for (int bin : bins) csv << ",bin_" << bin;
  csv << "\n";
  for (const auto& point : sweep) {
    csv << fmt(point.phase);
    for (int bin : bins) {
      const auto it = point.bin_powers.find(bin);
      csv << "," << fmt(it == point.bin_powers.end() ? 0.0 : it->second);
    }
    csv << "\n";
  }
  emitter.write("visibility_sweep.csv", csv.str());

  const double vis = visibility_from_sweep(sweep);
  const double phase = fringe_phase_from_sweep(sweep);

  // Amplitude imbalance between the interfering bins and the matching
  // two-beam visibility 2r/(1+r^2).
  const double pa = power_in_bin(run.output, std::min(l_a, l_b));
  const double pb = power_in_bin(run.output, std::max(l_a, l_b));
  const double r = pa > 0.0 && pb > 0.0 ? std::sqrt(std::min(pa, pb) / std::max(pa, pb)) : 0.0;

  // Reverse coherence check: two prepared bins converted back and projected
  // onto the charge superpositions.
  const PulseState seed_pulse = PulseState::basis({Polarization::H, 0, 0, -1}, params.loop.t0);
  const PulseState prepared = mz_prepare(seed_pulse, c.mz, T);
  const RunResult reverse_run = run_reverse(params, prepared);
  const double projection_efficiency =
      c.slm.diffraction_efficiency * params.output_coupler.efficiency;
  const double constructive =
      projective_measurement(normalized(reverse_run.output),
                             superposition_target(0, 1, 0.0), projection_efficiency);
  const double destructive = projective_measurement(
      normalized(reverse_run.output), superposition_target(0, 1, std::numbers::pi),
      projection_efficiency);
  const double projective_vis = visibility(std::max(constructive, destructive),
                                           std::min(constructive, destructive));

  json summary;
  summary["visibility"] = vis;
  summary["fringe_phase_rad"] = phase;
  summary["amplitude_ratio"] = r;
  summary["two_beam_visibility"] = 2.0 * r / (1.0 + r * r);
  summary["reverse_projective"] = {{"constructive", constructive},
                                   {"destructive", destructive},
                                   {"visibility", projective_vis}};
  return summary;
}

json sweep_scenario(const RunConfig& c, Emitter& emitter) {
  if (c.sweep.parameter != "reentry_coupling") {
    throw std::invalid_argument("sweep.parameter: only 'reentry_coupling' is supported");
  }
  const int n = c.sweep.points;
  struct Point {
    double value = 0.0;
    double per_loop = 0.0;
    double gamma = 0.0;
  };
  std::vector<Point> points(n);

  auto compute = [&](int i) {
    LoopParams loop = c.transcoder.loop;
    loop.reentry_coupling = c.sweep.from + (c.sweep.to - c.sweep.from) * i / double(n - 1);
    points[i] = {loop.reentry_coupling, per_loop_transmission(loop),
                 circulation_loss_gamma(loop)};
  };

  const int workers = std::min(c.workers, n);
  if (workers > 1) {
    std::vector<std::future<void>> tasks;
    for (int w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&, w] {
        for (int i = w; i < n; i += workers) compute(i);
      }));
    }
    for (auto& t : tasks) t.get();
  } else {
    for (int i = 0; i < n; ++i) compute(i);
  }

  // Per-point files first, merged CSV second, in index order.
  for (int i = 0; i < n; ++i) {
    json p;
    p["index"] = i;
    p["reentry_coupling"] = points[i].value;
    p["per_loop_transmission"] = points[i].per_loop;
    p["gamma"] = points[i].gamma;
    char name[32];
    std::snprintf(name, sizeof name, "point_%04d.json", i);
    emitter.write(name, p.dump(2) + "\n");
  }
  std::ostringstream csv;
  csv << "reentry_coupling,per_loop_transmission,gamma\n";
  for (const auto& p : points) {
    csv << fmt(p.value) << "," << fmt(p.per_loop) << "," << fmt(p.gamma) << "\n";
  }
  emitter.write("sweep.csv", csv.str());

  json summary;
  summary["points"] = n;
  summary["parameter"] = c.sweep.parameter;
  summary["gamma_first"] = points.front().gamma;
  summary["gamma_last"] = points.back().gamma;
  return summary;
}

}  // namespace

std::string run_scenario(const RunConfig& config) {
  Emitter emitter(config);
  json summary;
  switch (config.scenario) {
    case Scenario::Forward:
      summary = conversion_scenario(config, Direction::Forward, emitter);
      break;
    case Scenario::Reverse:
      summary = conversion_scenario(config, Direction::Reverse, emitter);
      break;
    case Scenario::CavitySpectrum:
      summary = cavity_spectrum_scenario(config, emitter);
      break;
    case Scenario::FringePattern:
      summary = fringe_pattern_scenario(config, emitter);
      break;
    case Scenario::Crosstalk:
      summary = crosstalk_scenario(config, emitter);
      break;
    case Scenario::Visibility:
      summary = visibility_scenario(config, emitter);
      break;
    case Scenario::Sweep:
      summary = sweep_scenario(config, emitter);
      break;
  }
  return emitter.finish(summary);
}

}  // namespace stt
