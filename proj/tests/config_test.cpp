#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "stt/config.hpp"

using namespace stt;

namespace {

std::string write_temp(const std::string& content) {
  static int counter = 0;
  const std::string path = "/tmp/stt_config_test_" + std::to_string(counter++) + ".json";
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("empty file yields the full default parameter set") {
  const RunConfig c = load_config(write_temp("   \n"));
  CHECK(c.profile == "paper-2016");
  CHECK(c.transcoder.cavity.mirror_reflectivity == doctest::Approx(0.95));
  CHECK(c.transcoder.cavity.spacing == doctest::Approx(0.010));
  CHECK(c.transcoder.cavity.curvature_radius_1 == doctest::Approx(0.050));
  CHECK(c.transcoder.loop.round_trip_time == doctest::Approx(11e-9));
  CHECK(c.analysis.waveform.pulse_fwhm == doctest::Approx(5e-9));
  CHECK(c.lg.params.wavelength == doctest::Approx(795e-9));
  CHECK(finesse(c.transcoder.cavity) == doctest::Approx(61.24).epsilon(1e-4));
  CHECK(per_loop_transmission(c.transcoder.loop) == doctest::Approx(0.485).epsilon(1e-5));
}

TEST_CASE("profiles") {
  const RunConfig ideal = default_config("ideal-lossless");
  CHECK(per_loop_transmission(ideal.transcoder.loop) == 1.0);
  CHECK(ideal.transcoder.cavity.airy_model == false);
  CHECK(ideal.transcoder.cavity.resonant_transmission_cap == 1.0);

  CHECK_THROWS_AS(default_config("unknown-profile"), std::invalid_argument);

  const RunConfig via_json = parse_config("{\"profile\": \"ideal-lossless\"}");
  CHECK(per_loop_transmission(via_json.transcoder.loop) == 1.0);
}

TEST_CASE("unit-suffixed keys scale into SI") {
  const RunConfig c = parse_config(R"({
    "cavity": {"spacing_mm": 20.0, "speed_of_light_m_per_s": 3e8},
    "loop": {"round_trip_ns": 22.0, "eom_gate_ns": 7.0},
    "lg": {"wavelength_nm": 1550.0},
    "analysis": {"pulse_fwhm_ns": 10.0}
  })");
  CHECK(c.transcoder.cavity.spacing == doctest::Approx(0.020));
  CHECK(fsr(c.transcoder.cavity) == doctest::Approx(7.5e9));
  CHECK(c.transcoder.loop.round_trip_time == doctest::Approx(22e-9));
  CHECK(c.lg.params.wavelength == doctest::Approx(1550e-9));
}

TEST_CASE("unknown keys are rejected with their path") {
  try {
    parse_config("{\"cavity\": {\"reflectivity\": 0.95}}");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("cavity.reflectivity") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{\"scenariooo\": \"forward\"}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{\"loop\": {\"chain\": [{\"transmission\": 1.0}]}}"),
                  std::invalid_argument);
}

TEST_CASE("invariant violations name the field") {
  try {
    parse_config("{\"cavity\": {\"spacing_mm\": 0.0}}");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("spacing") != std::string::npos);
  }

  // A gate wider than the round trip would straddle two passes.
  CHECK_THROWS_AS(parse_config("{\"loop\": {\"eom_gate_ns\": 12.0}}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{\"input\": {\"bins\": [1]}}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{\"input\": {\"oam_modes\": [-1]}}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{\"workers\": 0}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/path.json"), std::invalid_argument);
}

TEST_CASE("scenario names round trip") {
  for (Scenario s : {Scenario::Forward, Scenario::Reverse, Scenario::CavitySpectrum,
                     Scenario::FringePattern, Scenario::Crosstalk, Scenario::Visibility,
                     Scenario::Sweep}) {
    CHECK(scenario_from_name(scenario_name(s)) == s);
  }
  CHECK_THROWS_AS(scenario_from_name("diagonalize"), std::invalid_argument);

  const RunConfig c = parse_config("{\"scenario\": \"cavity-spectrum\"}");
  CHECK(c.scenario == Scenario::CavitySpectrum);
}

TEST_CASE("element keys load from the config") {
  const RunConfig c = parse_config(R"({
    "loop": {
      "gate_windows_ns": [[0.0, 5.0], [11.0, 16.0]],
      "vpp_charge_step": -1
    },
    "slm": {"pattern_charge": 2, "diffraction_efficiency": 0.7},
    "coupler": {"efficiency": 0.9, "extinction": 1e-4}
  })");
  CHECK(c.transcoder.loop.manual_gate_windows.size() == 2);
  CHECK(c.transcoder.loop.manual_gate_windows[1].start == doctest::Approx(11e-9));
  CHECK(c.slm.pattern_charge == 2);
  CHECK(c.slm.diffraction_efficiency == doctest::Approx(0.7));
  CHECK(c.transcoder.output_coupler.extinction == doctest::Approx(1e-4));

  CHECK_THROWS_AS(parse_config("{\"loop\": {\"vpp_charge_step\": 2}}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{\"loop\": {\"gate_windows_ns\": [[5.0, 1.0]]}}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config("{\"loop\": {\"gate_windows_ns\": [[0.0, 6.0], [3.0, 9.0]]}}"),
      std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{\"slm\": {\"diffraction_efficiency\": 1.5}}"),
                  std::invalid_argument);
}

TEST_CASE("chain overrides replace the documented counting") {
  const RunConfig c = parse_config(R"({
    "loop": {
      "chain": [{"name": "loop", "transmission": 0.485, "passes_per_loop": 1}],
      "reentry_coupling": 1.0
    }
  })");
  CHECK(per_loop_transmission(c.transcoder.loop) == doctest::Approx(0.485).epsilon(1e-12));
  CHECK(circulation_loss_gamma(c.transcoder.loop) ==
        doctest::Approx(2.061856).epsilon(1e-5));
}
