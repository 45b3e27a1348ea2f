#include "stt/lg.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace stt {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double LGParams::rayleigh_range() const { return kPi * waist * waist / wavelength; }

double LGParams::wavenumber() const { return 2.0 * kPi / wavelength; }

double LGParams::beam_radius(double z) const {
  const double zr = rayleigh_range();
  return waist * std::sqrt(1.0 + (z / zr) * (z / zr));
}

void validate(const LGParams& p) {
  if (!(p.waist > 0.0)) throw std::invalid_argument("lg.waist must be > 0");
  if (!(p.wavelength > 0.0)) throw std::invalid_argument("lg.wavelength must be > 0");
}

double laguerre(int p, int alpha, double x) {
  if (p < 0) throw std::invalid_argument("laguerre: p must be >= 0");
  if (p == 0) return 1.0;
  double lkm1 = 1.0;
  double lk = 1.0 + alpha - x;
  for (int k = 1; k < p; ++k) {
    const double lkp1 = ((2.0 * k + 1.0 + alpha - x) * lk - (k + alpha) * lkm1) / (k + 1.0);
    lkm1 = lk;
    lk = lkp1;
  }
  return lk;
}

Complex lg_field(const LGParams& params, int p, int l, double z, double r, double alpha) {
  if (p < 0) throw std::invalid_argument("lg_field: p must be >= 0");
  if (r < 0.0) throw std::invalid_argument("lg_field: r must be >= 0");
  const int al = std::abs(l);
  const double zr = params.rayleigh_range();
  const double w = params.beam_radius(z);

  // Normalization in log space so large |l| stays finite.
  const double log_norm = 0.5 * (std::log(2.0) + std::lgamma(p + 1.0) - std::log(kPi) -
                                 std::lgamma(p + al + 1.0));

  const double u = r * std::sqrt(2.0) / w;
  double log_radial = -0.5 * u * u;
  if (al > 0) {
    if (r == 0.0) return {0.0, 0.0};
    log_radial += al * std::log(u);
  }
  const double magnitude =
      std::exp(log_norm + log_radial) / w * laguerre(p, al, 2.0 * r * r / (w * w));

  const double gouy = (2.0 * p + al + 1.0) * std::atan2(z, zr);
  const double curvature = params.wavenumber() * r * r * z / (2.0 * (z * z + zr * zr));
  const double phase = l * alpha + curvature - gouy;
  return std::polar(magnitude, phase);
}

void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes,
                    Eigen::VectorXd& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration from the Chebyshev-angle estimate of the i-th root.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = x;
    weights[i] = w;
    nodes[n - 1 - i] = -x;
    weights[n - 1 - i] = w;
  }
  // Map [-1, 1] -> [a, b].
  const double mid = 0.5 * (a + b);
  const double scale = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    nodes[i] = mid - scale * nodes[i];
    weights[i] *= scale;
  }
}

Complex mode_overlap(const LGParams& params_a, int p_a, int l_a, const LGParams& params_b,
                     int p_b, int l_b, double z, const GridSpec& grid) {
  validate(params_a);
  validate(params_b);
  const int max_l = std::max(std::abs(l_a), std::abs(l_b));
  if (grid.n_angular < 2 * (max_l + 1)) {
    throw std::invalid_argument("mode_overlap: angular grid under-resolves |l| = " +
                                std::to_string(max_l));
  }
  if (grid.n_radial < 16 + 8 * (p_a + p_b) + 2 * max_l) {
    throw std::invalid_argument("mode_overlap: radial grid under-resolves the modes");
  }
  const double extent =
      grid.radial_extent_factor * std::max(params_a.beam_radius(z), params_b.beam_radius(z));

  Eigen::VectorXd r_nodes, r_weights;
  gauss_legendre(grid.n_radial, 0.0, extent, r_nodes, r_weights);

  const double dalpha = 2.0 * kPi / grid.n_angular;
  Complex acc(0.0, 0.0);
  for (int i = 0; i < grid.n_radial; ++i) {
    const double r = r_nodes[i];
    Complex ring(0.0, 0.0);
    for (int j = 0; j < grid.n_angular; ++j) {
      const double alpha = j * dalpha;
      ring += std::conj(lg_field(params_a, p_a, l_a, z, r, alpha)) *
              lg_field(params_b, p_b, l_b, z, r, alpha);
    }
    acc += ring * (r_weights[i] * r * dalpha);
  }
  return acc;
}

double IntensityGrid::radius(int i) const {
  return radial_extent * (i + 1.0) / static_cast<double>(n_radial());
}

double IntensityGrid::angle(int j) const {
  return 2.0 * kPi * j / static_cast<double>(n_angular());
}

IntensityGrid mirror_interference_pattern(const LGParams& params, int l, double z,
                                          const GridSpec& grid) {
  if (l < 0) throw std::invalid_argument("mirror_interference_pattern: l must be >= 0");
  validate(params);
  IntensityGrid out;
  out.radial_extent = grid.radial_extent_factor * params.beam_radius(z);
  out.values.resize(grid.n_radial, grid.n_angular);
  for (int i = 0; i < grid.n_radial; ++i) {
    const double r = out.radius(i);
    for (int j = 0; j < grid.n_angular; ++j) {
      const double alpha = out.angle(j);
      const Complex field = lg_field(params, 0, l, z, r, alpha) +
                            lg_field(params, 0, -l, z, r, alpha);
      out.values(i, j) = std::norm(field);
    }
  }
  return out;
}

int count_fringes(const IntensityGrid& grid) {
  const double total = grid.values.sum();
  if (!(total > 0.0)) throw std::invalid_argument("count_fringes: no bright ring found");

  Eigen::Index ring;
  grid.values.rowwise().sum().maxCoeff(&ring);

  const int n = grid.n_angular();
  const Eigen::ArrayXd profile = grid.values.row(ring).transpose();
  const double mean = profile.mean();
  if (!(mean > 0.0)) throw std::invalid_argument("count_fringes: empty brightest ring");

  // Discrete angular spectrum; harmonics above n/2 alias and are excluded.
  int best_m = 0;
  double best_mag = 0.0;
  for (int m = 1; m < n / 2; ++m) {
    Complex c(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      c += profile[j] * std::polar(1.0, -2.0 * kPi * m * j / n);
    }
    const double mag = std::abs(c);
    if (mag > best_mag) {
      best_mag = mag;
      best_m = m;
    }
  }
  const double uniform_floor = 1e-6 * mean * n;
  return best_mag > uniform_floor ? best_m : 0;
}

}  // namespace stt
