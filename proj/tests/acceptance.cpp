// Acceptance suite: every shipped guarantee exercised at its stated
// tolerance, one pass/fail line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stt/analysis.hpp"
#include "stt/cavity.hpp"
#include "stt/config.hpp"
#include "stt/lg.hpp"
#include "stt/scenarios.hpp"
#include "stt/transcoder.hpp"

using namespace stt;

namespace {

constexpr double kPi = std::numbers::pi;

struct Checker {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      detail = message;
    }
  }

  void note(const std::string& message) {
    if (detail.empty()) detail = message;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// --- criterion implementations -------------------------------------------

void closed_form_cavity(Checker& c) {
  CavityParams rounded_c;
  rounded_c.speed_of_light = 3e8;

  const double f = finesse(rounded_c);
  c.require(std::abs(f - 61.24) <= 0.01, "finesse " + fmt(f));

  const double free_range = fsr(rounded_c);
  c.require(free_range == 15e9, "fsr " + fmt(free_range));

  const double width = fwhm(rounded_c);
  c.require(std::abs(width - 245e6) <= 1e6, "fwhm " + fmt(width));

  const double gouy = gouy_factor(rounded_c);
  c.require(std::abs(gouy - 0.2048) <= 1e-4, "gouy " + fmt(gouy));
  c.note("finesse " + fmt(f) + ", fsr " + fmt(free_range) + " Hz, fwhm " + fmt(width) +
         " Hz, gouy " + fmt(gouy));
}

void timing_law(Checker& c) {
  const TranscoderParams p = default_config("paper-2016").transcoder;
  for (int l = 0; l <= 3; ++l) {
    const RunResult r = run_forward(p, PulseState::basis({Polarization::H, l, 0, 0}));
    const int bin = argmax_bin(r.output);
    c.require(bin == l, "charge " + std::to_string(l) + " peaked at bin " + std::to_string(bin));
  }
}

TranscoderParams lumped_loss_params() {
  TranscoderParams p = default_config("ideal-lossless").transcoder;
  p.loop.chain = {{"loop", 0.485, 1}};
  p.loop.max_loops = 12;
  return p;
}

void loss_scaling(Checker& c) {
  const TranscoderParams p = lumped_loss_params();
  std::vector<double> diag;
  for (int l = 0; l <= 10; ++l) {
    const RunResult r = run_forward(p, PulseState::basis({Polarization::H, l, 0, 0}));
    diag.push_back(power_in_bin(r.output, l));
  }
  for (int l = 0; l < 10; ++l) {
    const double ratio = diag[l + 1] / diag[l];
    c.require(std::abs(ratio - 0.485) <= 1e-9,
              "adjacent ratio " + fmt(ratio) + " at l=" + std::to_string(l));
  }
  const double gamma = circulation_loss_gamma(p.loop);
  c.require(std::abs(gamma - 2.06) <= 0.01, "gamma " + fmt(gamma));
  c.note("ratio 0.485 exact over l<=10, gamma " + fmt(gamma));
}

PulseState random_superposition(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Complex amps[4];
  double power = 0.0;
  for (auto& a : amps) {
    a = Complex(gauss(rng), gauss(rng));
    power += std::norm(a);
  }
  StateBuilder b;
  for (int l = 0; l <= 3; ++l) b.add({Polarization::H, l, 0, 0}, amps[l] / std::sqrt(power));
  return b.finish();
}

void round_trip(Checker& c) {
  std::mt19937_64 rng(2016);
  const TranscoderParams ideal = default_config("ideal-lossless").transcoder;
  const TranscoderParams lossy = lumped_loss_params();
  const double gamma = circulation_loss_gamma(lossy.loop);

  int argmax_hits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PulseState in = random_superposition(rng);
    const auto want = charge_distribution(in);

    const RunResult fwd = run_forward(ideal, in);
    const RunResult rev = run_reverse(ideal, as_reverse_input(fwd.output));
    const auto got = charge_distribution(rev.output);
    for (const auto& [l, weight] : want) {
      c.require(std::abs(got.at(l) - weight) <= 1e-9,
                "lossless distribution off by " + fmt(std::abs(got.at(l) - weight)));
    }

    const RunResult lf = run_forward(lossy, in);
    const RunResult lr = run_reverse(lossy, as_reverse_input(lf.output));
    const PulseState restored = loss_compensated(lr.output, gamma * gamma, IndexKind::Charge);
    const auto lg = charge_distribution(restored);
    for (const auto& [l, weight] : want) {
      c.require(std::abs(lg.at(l) - weight) <= 1e-9,
                "compensated distribution off by " + fmt(std::abs(lg.at(l) - weight)));
    }
    if (argmax_charge(restored) == argmax_charge(in)) ++argmax_hits;
  }
  c.require(argmax_hits == 1000,
            "argmax matched in " + std::to_string(argmax_hits) + "/1000 runs");
  c.note("1000 runs, argmax 1000/1000");
}

void coherence_conservation(Checker& c) {
  const RunConfig ideal = default_config("ideal-lossless");
  const double T = ideal.transcoder.loop.round_trip_time;
  std::vector<double> phases(16);
  for (int i = 0; i < 16; ++i) phases[i] = 2.0 * kPi * i / 16.0;

  const double inv = 1.0 / std::sqrt(2.0);
  for (double phi : phases) {
    const PulseState in = superpose({{{Polarization::H, 0, 0, 0}, Complex(inv, 0.0)},
                                     {{Polarization::H, 1, 0, 0}, std::polar(inv, phi)}});
    const RunResult run = run_forward(ideal.transcoder, in);
    const auto sweep = mz_readout(run.output, ideal.mz, phases, T);
    const double vis = visibility_from_sweep(sweep);
    c.require(std::abs(vis - 1.0) <= 1e-9, "visibility " + fmt(vis) + " at phi " + fmt(phi));
    const double recovered = fringe_phase_from_sweep(sweep);
    const double delta = std::abs(std::remainder(recovered - phi, 2.0 * kPi));
    c.require(delta <= 1e-9, "fringe phase off by " + fmt(delta) + " at phi " + fmt(phi));
  }

  // Documented imbalance: uncompensated per-loop loss tau leaves amplitude
  // ratio r = sqrt(tau) and visibility 2r/(1+r^2).
  TranscoderParams lossy = lumped_loss_params();
  const PulseState in = superpose({{{Polarization::H, 0, 0, 0}, Complex(inv, 0.0)},
                                   {{Polarization::H, 1, 0, 0}, Complex(inv, 0.0)}});
  const RunResult run = run_forward(lossy, in);
  const auto sweep = mz_readout(run.output, ideal.mz, phases, T);
  const double r = std::sqrt(0.485);
  const double expected = 2.0 * r / (1.0 + r * r);
  const double vis = visibility_from_sweep(sweep);
  c.require(std::abs(vis - expected) <= 1e-9,
            "imbalanced visibility " + fmt(vis) + " vs " + fmt(expected));
  c.note("16 phases at visibility 1, imbalanced case " + fmt(vis));
}

void reverse_projective_interference(Checker& c) {
  const RunConfig ideal = default_config("ideal-lossless");
  const double T = ideal.transcoder.loop.round_trip_time;
  for (int i = 0; i <= 1; ++i) {
    const PulseState seed = PulseState::basis({Polarization::H, 0, 0, -(i + 1)});
    const PulseState prepared = mz_prepare(seed, ideal.mz, T);
    const RunResult run = run_reverse(ideal.transcoder, prepared);
    const PulseState out = normalized(run.output);
    const double plus = projective_measurement(out, superposition_target(i, i + 1, 0.0));
    const double minus = projective_measurement(out, superposition_target(i, i + 1, kPi));
    const double vis =
        visibility(std::max(plus, minus), std::min(plus, minus));
    c.require(std::abs(vis - 1.0) <= 1e-9,
              "projective visibility " + fmt(vis) + " at i=" + std::to_string(i));
  }
}

void crosstalk_band(Checker& c) {
  const RunConfig profile = default_config("paper-2016");
  std::string summary;
  for (Direction direction : {Direction::Forward, Direction::Reverse}) {
    const EfficiencyMatrix m = conversion_matrix(profile.transcoder, direction, 4);
    const CrosstalkTable table = crosstalk_table(m, profile.analysis.crosstalk_floor_db);
    c.require(table.mean_db.has_value(), "no defined cross-talk entries");
    if (!table.mean_db) continue;
    const double mean = *table.mean_db;
    const char* name = direction == Direction::Forward ? "forward" : "reverse";
    c.require(mean >= -25.0 && mean <= -15.0,
              std::string(name) + " mean " + fmt(mean) + " dB outside [-25, -15]");
    summary += (summary.empty() ? "" : ", ") + std::string(name) + " mean " + fmt(mean) + " dB";
  }
  c.note(summary);
}

void fringe_diagnostic(Checker& c) {
  const LGParams beam{1e-3, 795e-9};
  for (int l = 0; l <= 5; ++l) {
    const int n = count_fringes(mirror_interference_pattern(beam, l, 0.0));
    c.require(n == 2 * l,
              "charge " + std::to_string(l) + " counted " + std::to_string(n) + " fringes");
  }
}

void lg_numerics(Checker& c) {
  const LGParams beam{1e-3, 795e-9};
  for (int p = 0; p <= 2; ++p) {
    for (int l = -5; l <= 5; ++l) {
      const double n = std::abs(mode_overlap(beam, p, l, beam, p, l, 0.0));
      c.require(std::abs(n - 1.0) <= 1e-4,
                "normalization " + fmt(n) + " at p=" + std::to_string(p) +
                    " l=" + std::to_string(l));
    }
  }
  const struct {
    int pa, la, pb, lb;
  } pairs[] = {{0, 0, 1, 0}, {0, 2, 2, 2}, {1, 1, 2, 1}, {0, 1, 0, 2}, {2, -3, 1, -3}};
  for (const auto& pair : pairs) {
    const double off =
        std::abs(mode_overlap(beam, pair.pa, pair.la, beam, pair.pb, pair.lb, 0.0));
    c.require(off < 1e-3, "orthogonality " + fmt(off));
  }

  LGParams wider = beam;
  wider.waist = 1.2e-3;
  const double closed_form = 2.0 * beam.waist * wider.waist /
                             (beam.waist * beam.waist + wider.waist * wider.waist);
  const double numeric = std::abs(mode_overlap(beam, 0, 0, wider, 0, 0, 0.0));
  c.require(std::abs(numeric - closed_form) <= 1e-4,
            "waist mismatch " + fmt(numeric) + " vs " + fmt(closed_form));
  c.note("waist-mismatch overlap " + fmt(numeric) + " vs closed form " + fmt(closed_form));
}

void eigenfrequency_scan(Checker& c) {
  CavitySpectrum spectrum = make_spectrum(CavityParams{});
  spectrum.gouy_factor = 0.204833;

  const int full = max_clean_oam(spectrum, 1.0);
  const int half = max_clean_oam(spectrum, 0.5);

  // Pinned expectations for this criterion: 43 and 165. The nearest-resonance
  // scan defined for max_clean_oam finds closer approaches first (charge 39
  // at 0.0115 FSR and charge 83 at 0.0011 FSR), so these pins are not
  // reachable; see the repository notes on the clean-range scan.
  c.require(full == 43, "criterion 1.0 scan returned " + std::to_string(full) +
                            " (pinned expectation 43)");
  c.require(half == 165, "criterion 0.5 scan returned " + std::to_string(half) +
                             " (pinned expectation 165)");

  // The reported range must flag its disagreement with the claimed l < 201.
  const RunConfig config = default_config("paper-2016");
  c.require(full < config.analysis.expected_clean_oam,
            "scan unexpectedly reached the claimed range");
}

void lock_servo(Checker& c) {
  const CavityParams p;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> step(0.0, 1e-13);

  LockState servo;
  double sum_sq = 0.0;
  int counted = 0;
  for (int i = 0; i < 20000; ++i) {
    servo = lock_step(p, servo, 1e-5, step(rng));
    if (i >= 500) {
      sum_sq += servo.length_error * servo.length_error;
      ++counted;
    }
  }
  const double rms_detuning = std::sqrt(sum_sq / counted) * detuning_per_meter(p);
  c.require(rms_detuning < fwhm(p) / 20.0,
            "closed-loop RMS " + fmt(rms_detuning) + " Hz vs bound " + fmt(fwhm(p) / 20.0));

  std::mt19937_64 rng2(7);
  LockState open;
  open.gain_p = 0.0;
  open.gain_i = 0.0;
  double integrated = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double d = step(rng2);
    integrated += d;
    open = lock_step(p, open, 1e-5, d);
  }
  c.require(std::abs(open.length_error - integrated) <=
                1e-12 * std::max(1e-30, std::abs(integrated)),
            "open loop deviated from the integrated disturbance");
  c.note("closed-loop RMS " + fmt(rms_detuning) + " Hz, bound " + fmt(fwhm(p) / 20.0) + " Hz");
}

void determinism(Checker& c) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "stt_acceptance_det";
  fs::remove_all(base);

  auto run_twice = [&](Scenario scenario, const std::string& tag,
                       const std::function<void(RunConfig&)>& tweak) {
    std::vector<fs::path> dirs;
    for (int copy = 0; copy < 2; ++copy) {
      RunConfig config = default_config("paper-2016");
      config.scenario = scenario;
      config.seed = 77;
      config.output_dir = (base / (tag + std::to_string(copy))).string();
      tweak(config);
      run_scenario(config);
      dirs.push_back(config.output_dir);
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());

    // Every emitted file appears in the manifest's file list; no orphans.
    std::ifstream manifest_in(dirs[0] / "manifest.json");
    const auto manifest = nlohmann::json::parse(manifest_in);
    std::set<std::string> listed;
    for (const auto& name : manifest.at("files")) listed.insert(name.get<std::string>());
    listed.insert("manifest.json");
    for (const auto& name : names) {
      c.require(listed.contains(name), tag + ": unlisted output " + name);
    }
    c.require(listed.size() == names.size(), tag + ": manifest lists missing files");

    for (const auto& name : names) {
      for (int copy = 0; copy < 2; ++copy) {
        c.require(fs::exists(dirs[copy] / name), tag + ": missing " + name);
      }
      std::ifstream a(dirs[0] / name, std::ios::binary);
      std::ifstream b(dirs[1] / name, std::ios::binary);
      std::ostringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      c.require(sa.str() == sb.str(), tag + ": " + name + " differs between runs");
    }
  };

  run_twice(Scenario::Crosstalk, "crosstalk", [](RunConfig&) {});
  run_twice(Scenario::Visibility, "visibility", [](RunConfig& config) {
    config.analysis.intensity_jitter_rms = 0.02;  // exercises the seeded path
  });
  run_twice(Scenario::Sweep, "sweep", [](RunConfig& config) { config.workers = 4; });
  fs::remove_all(base);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Checker&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "closed-form cavity numbers", closed_form_cavity},
      {2, "forward timing law t_l = t0 + T*l", timing_law},
      {3, "geometric loss scaling, gamma 2.06", loss_scaling},
      {4, "round-trip identity over random superpositions", round_trip},
      {5, "coherence conservation through forward conversion", coherence_conservation},
      {6, "reverse projective interference", reverse_projective_interference},
      {7, "nearest-neighbour cross-talk band", crosstalk_band},
      {8, "mirror-image fringe diagnostic 2l", fringe_diagnostic},
      {9, "LG normalization, orthogonality, waist overlap", lg_numerics},
      {10, "clean-OAM eigenfrequency scan", eigenfrequency_scan},
      {11, "cavity lock servo residual", lock_servo},
      {12, "byte-identical reruns", determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Checker checker;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.fn(checker);
    } catch (const std::exception& e) {
      checker.ok = false;
      checker.detail = std::string("exception: ") + e.what();
    }
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start);
    std::printf("criterion %2d  %-52s %s  [%6.2fs]%s%s\n", criterion.id, criterion.name,
                checker.ok ? "PASS" : "FAIL", elapsed.count(),
                checker.detail.empty() ? "" : "  -- ", checker.detail.c_str());
    if (!checker.ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failing\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passing\n", criteria.size());
  return 0;
}
