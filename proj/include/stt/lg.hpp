#pragma once

#include <Eigen/Dense>

#include "stt/state.hpp"

namespace stt {

/// Laguerre-Gaussian beam geometry. Rayleigh range and wavenumber are derived
/// from (waist, wavelength) so they cannot drift out of consistency.
struct LGParams {
  double waist = 1e-3;        // w0 (m)
  double wavelength = 795e-9;  // (m)

  double rayleigh_range() const;
  double wavenumber() const;
  /// Beam radius w(z).
  double beam_radius(double z) const;
};

void validate(const LGParams& params);

/// Generalized Laguerre polynomial L_p^alpha(x) by the three-term recurrence.
double laguerre(int p, int alpha, double x);

/// Full LG_{p,l} complex field at (r, alpha, z): normalization, vortex term,
/// Gaussian envelope, Laguerre radial factor, azimuthal phase, wavefront
/// curvature phase and Gouy phase.
Complex lg_field(const LGParams& params, int p, int l, double z, double r, double alpha);

/// Quadrature / sampling resolution for transverse-plane work.
struct GridSpec {
  int n_radial = 256;
  int n_angular = 512;
  double radial_extent_factor = 4.0;  // extent = factor * max beam radius
};

/// Transverse overlap <a|b> integrated with Gauss-Legendre radial nodes and a
/// uniform angular grid (exact for azimuthal harmonics below n_angular / 2).
/// Throws if the grid cannot resolve the requested modes.
Complex mode_overlap(const LGParams& params_a, int p_a, int l_a,
                     const LGParams& params_b, int p_b, int l_b, double z,
                     const GridSpec& grid = {});

/// Sampled transverse intensity, rows = radius, cols = azimuth.
struct IntensityGrid {
  Eigen::ArrayXXd values;      // n_radial x n_angular, >= 0
  double radial_extent = 0.0;  // m

  int n_radial() const { return static_cast<int>(values.rows()); }
  int n_angular() const { return static_cast<int>(values.cols()); }
  double radius(int i) const;
  double angle(int j) const;
};

/// Intensity of LG_{0,l} interfered with its mirror image LG_{0,-l}; the
/// azimuthal profile carries 2l lobes.
IntensityGrid mirror_interference_pattern(const LGParams& params, int l, double z,
                                          const GridSpec& grid = {});

/// Dominant nonzero azimuthal harmonic on the brightest ring, 0 when the
/// profile is azimuthally uniform. Throws when the grid holds no light.
int count_fringes(const IntensityGrid& grid);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes,
                    Eigen::VectorXd& weights);

}  // namespace stt
