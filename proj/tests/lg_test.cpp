#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stt/lg.hpp"

using namespace stt;

namespace {

constexpr double kPi = std::numbers::pi;

const LGParams kBeam{1e-3, 795e-9};

}  // namespace

TEST_CASE("geometry derivations stay consistent") {
  CHECK(kBeam.rayleigh_range() == doctest::Approx(kPi * 1e-6 / 795e-9).epsilon(1e-12));
  CHECK(kBeam.wavenumber() == doctest::Approx(2.0 * kPi / 795e-9).epsilon(1e-12));
  CHECK(kBeam.beam_radius(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(kBeam.beam_radius(kBeam.rayleigh_range()) ==
        doctest::Approx(1e-3 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("laguerre recurrence matches closed forms") {
  CHECK(laguerre(0, 3, 2.5) == 1.0);
  for (double x : {0.0, 0.7, 2.0, 9.5}) {
    for (int a : {0, 1, 4}) {
      CHECK(laguerre(1, a, x) == doctest::Approx(1.0 + a - x).epsilon(1e-12));
      const double l2 = 0.5 * (x * x - 2.0 * (a + 2.0) * x + (a + 1.0) * (a + 2.0));
      CHECK(laguerre(2, a, x) == doctest::Approx(l2).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(laguerre(-1, 0, 0.0), std::invalid_argument);
}

TEST_CASE("on-axis field of the fundamental mode") {
  const Complex f = lg_field(kBeam, 0, 0, 0.0, 0.0, 0.0);
  CHECK(f.real() == doctest::Approx(std::sqrt(2.0 / kPi) / 1e-3).epsilon(1e-12));
  CHECK(f.imag() == doctest::Approx(0.0));
}

TEST_CASE("vortex null and azimuthal phase") {
  CHECK(std::abs(lg_field(kBeam, 0, 3, 0.0, 0.0, 1.0)) == 0.0);

  // Magnitude is independent of the azimuth; the phase winds l times.
  const double r = 0.7e-3;
  const double m0 = std::abs(lg_field(kBeam, 0, 2, 0.0, r, 0.0));
  for (double alpha : {0.3, 1.9, 4.4}) {
    const Complex f = lg_field(kBeam, 0, 2, 0.0, r, alpha);
    CHECK(std::abs(f) == doctest::Approx(m0).epsilon(1e-12));
    const Complex expected = std::polar(m0, 2.0 * alpha);
    CHECK(std::abs(f - expected) < 1e-9 * m0);
  }
}

TEST_CASE("gouy phase between the focal planes") {
  const double zr = kBeam.rayleigh_range();
  // On-axis (radius small enough that the curvature phase is negligible):
  // arg f(+z_R) - arg f(-z_R) = -(2p+|l|+1) * pi/2.
  for (int p = 0; p <= 2; ++p) {
    for (int l = 0; l <= 2; ++l) {
      const double r = l == 0 ? 0.0 : 1e-9;
      const Complex a = lg_field(kBeam, p, l, zr, r, 0.0);
      const Complex b = lg_field(kBeam, p, l, -zr, r, 0.0);
      const Complex ratio = a / b;
      const double order = 2.0 * p + std::abs(l) + 1.0;
      const Complex expected = std::polar(1.0, -order * kPi / 2.0);
      CHECK(std::abs(ratio / std::abs(ratio) - expected) < 1e-6);
    }
  }
}

TEST_CASE("numerical normalization and orthogonality") {
  for (int p = 0; p <= 2; ++p) {
    for (int l = -5; l <= 5; ++l) {
      const Complex n = mode_overlap(kBeam, p, l, kBeam, p, l, 0.0);
      CHECK(std::abs(n - Complex(1.0, 0.0)) < 1e-4);
    }
  }

  // Distinct azimuthal charges vanish exactly under the angular quadrature.
  CHECK(std::abs(mode_overlap(kBeam, 0, 1, kBeam, 0, 2, 0.0)) < 1e-12);
  CHECK(std::abs(mode_overlap(kBeam, 1, -3, kBeam, 1, 3, 0.0)) < 1e-12);

  // Distinct radial orders at equal charge.
  CHECK(std::abs(mode_overlap(kBeam, 0, 0, kBeam, 1, 0, 0.0)) < 1e-3);
  CHECK(std::abs(mode_overlap(kBeam, 0, 2, kBeam, 2, 2, 0.0)) < 1e-3);
  CHECK(std::abs(mode_overlap(kBeam, 1, 1, kBeam, 2, 1, 0.0)) < 1e-3);
}

TEST_CASE("waist mismatch against the closed-form overlap") {
  LGParams wider = kBeam;
  wider.waist = 1.2e-3;
  const double wa = kBeam.waist;
  const double wb = wider.waist;
  const double expected = 2.0 * wa * wb / (wa * wa + wb * wb);

  const Complex numeric = mode_overlap(kBeam, 0, 0, wider, 0, 0, 0.0);
  CHECK(numeric.real() == doctest::Approx(expected).epsilon(1e-4));
  CHECK(std::abs(numeric.imag()) < 1e-9);
}

TEST_CASE("under-resolved grids are rejected") {
  GridSpec tiny;
  tiny.n_angular = 8;
  CHECK_THROWS_AS(mode_overlap(kBeam, 0, 5, kBeam, 0, 5, 0.0, tiny), std::invalid_argument);
  GridSpec coarse;
  coarse.n_radial = 8;
  CHECK_THROWS_AS(mode_overlap(kBeam, 2, 2, kBeam, 2, 2, 0.0, coarse), std::invalid_argument);
}

TEST_CASE("mirror-image interference carries 2l azimuthal lobes") {
  for (int l = 0; l <= 5; ++l) {
    const IntensityGrid grid = mirror_interference_pattern(kBeam, l, 0.0);
    CHECK(count_fringes(grid) == 2 * l);
  }
}

TEST_CASE("fringe count is rotation invariant") {
  const IntensityGrid grid = mirror_interference_pattern(kBeam, 1, 0.0);
  for (int shift : {13, 100, 311}) {
    IntensityGrid rotated = grid;
    const int n = grid.n_angular();
    for (int i = 0; i < grid.n_radial(); ++i) {
      for (int j = 0; j < n; ++j) {
        rotated.values(i, j) = grid.values(i, (j + shift) % n);
      }
    }
    CHECK(count_fringes(rotated) == 2);
  }
}

TEST_CASE("count_fringes rejects an empty grid") {
  IntensityGrid dark;
  dark.values = Eigen::ArrayXXd::Zero(16, 32);
  dark.radial_extent = 1.0;
  CHECK_THROWS_AS(count_fringes(dark), std::invalid_argument);
}

TEST_CASE("gauss-legendre quadrature") {
  Eigen::VectorXd nodes, weights;
  gauss_legendre(12, 0.0, 1.0, nodes, weights);
  double integral = 0.0;
  for (int i = 0; i < nodes.size(); ++i) integral += weights[i] * nodes[i] * nodes[i];
  CHECK(integral == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  LGParams bad;
  bad.waist = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  CHECK_THROWS_AS(lg_field(kBeam, -1, 0, 0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lg_field(kBeam, 0, 0, 0.0, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mirror_interference_pattern(kBeam, -1, 0.0), std::invalid_argument);
}
