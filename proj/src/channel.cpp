#include "marlpc/channel.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace marlpc {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.7071067811865475244;
}  // namespace

double path_loss_db(double distance_km, const PathLossParams& params) {
  if (std::isnan(distance_km)) throw std::invalid_argument("path_loss_db: NaN distance");
  const double d = std::max(distance_km, params.min_distance_km);
  return params.const_db + params.slope_db_per_decade * std::log10(d);
}

double shadowing_correlation(double displacement_m, double d_cor_m) {
  return std::exp(-displacement_m / d_cor_m);
}

double bessel_j0(double x) {
  x = std::abs(x);
  if (x <= 8.0) {
    // sum_m (-1)^m (x^2/4)^m / (m!)^2; terms peak near 114 at x = 8, which
    // costs ~3 digits to cancellation and still lands far below 1e-8.
    const double q = x * x / 4.0;
    double term = 1.0, sum = 1.0;
    for (int m = 1; m <= 40; ++m) {
      term *= -q / (static_cast<double>(m) * m);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum) + 1e-300) break;
    }
    return sum;
  }
  // Hankel expansion J0(x) ~ sqrt(2/(pi x)) [P(z) cos(x - pi/4) - Q(z) sin(x - pi/4)],
  // z = 8/x, with the standard rational fits for P and Q.
  const double z = 8.0 / x;
  const double z2 = z * z;
  const double p = 1.0 + z2 * (-0.1098628627e-2 +
                   z2 * (0.2734510407e-4 + z2 * (-0.2073370639e-5 + z2 * 0.2093887211e-6)));
  const double q = z * (-0.1562499995e-1 +
                   z2 * (0.1430488765e-3 +
                   z2 * (-0.6911147651e-5 + z2 * (0.7621095161e-6 - z2 * 0.934935152e-7))));
  const double chi = x - 0.25 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

double jakes_correlation(double speed_mps, double carrier_hz, double slot_duration_s) {
  const double doppler_hz = speed_mps * carrier_hz / kSpeedOfLightMps;
  return bessel_j0(2.0 * kPi * doppler_hz * slot_duration_s);
}

ShadowingField init_shadowing(int cells, int links, double sigma_db, double d_cor_m,
                              RngStream& rng) {
  ShadowingField field;
  field.sigma_db = sigma_db;
  field.d_cor_m = d_cor_m;
  field.x_db.resize(cells, links);
  for (int n = 0; n < links; ++n)
    for (int k = 0; k < cells; ++k) field.x_db(k, n) = sigma_db * rng.normal();
  return field;
}

void step_shadowing(ShadowingField& field, std::span<const double> displacement_m,
                    RngStream& rng) {
  const int cells = static_cast<int>(field.x_db.rows());
  const int links = static_cast<int>(field.x_db.cols());
  for (int n = 0; n < links; ++n) {
    const double rho = shadowing_correlation(displacement_m[n], field.d_cor_m);
    const double innovation = field.sigma_db * std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (int k = 0; k < cells; ++k)
      field.x_db(k, n) = rho * field.x_db(k, n) + innovation * rng.normal();
  }
}

FadingField init_fading(int cells, int links, RngStream& rng) {
  FadingField field;
  field.h.resize(cells, links);
  for (int n = 0; n < links; ++n)
    for (int k = 0; k < cells; ++k)
      field.h(k, n) = std::complex<double>(rng.normal() * kInvSqrt2, rng.normal() * kInvSqrt2);
  return field;
}

void step_fading_rho(FadingField& field, std::span<const double> rho_per_device, RngStream& rng) {
  const int cells = static_cast<int>(field.h.rows());
  const int links = static_cast<int>(field.h.cols());
  for (int n = 0; n < links; ++n) {
    const double rho = rho_per_device[n];
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho)) * kInvSqrt2;
    for (int k = 0; k < cells; ++k) {
      const std::complex<double> e(innovation * rng.normal(), innovation * rng.normal());
      field.h(k, n) = rho * field.h(k, n) + e;
    }
  }
}

void step_fading(FadingField& field, std::span<const double> doppler_hz, double slot_duration_s,
                 RngStream& rng) {
  std::vector<double> rho(doppler_hz.size());
  for (std::size_t n = 0; n < doppler_hz.size(); ++n)
    rho[n] = bessel_j0(2.0 * kPi * doppler_hz[n] * slot_duration_s);
  step_fading_rho(field, rho, rng);
}

GainMatrix compose_gains(const CellLayout& layout, std::span<const DeviceKinematics> devices,
                         const ShadowingField& shadowing, const FadingField& fading,
                         const PathLossParams& params) {
  const int cells = layout.cells;
  const int links = static_cast<int>(devices.size());
  if (shadowing.x_db.rows() != cells || shadowing.x_db.cols() != links ||
      fading.h.rows() != cells || fading.h.cols() != links)
    throw std::invalid_argument("compose_gains: field shape mismatch");

  GainMatrix out;
  out.alpha.resize(cells, links);
  out.gain.resize(cells, links);
  for (int n = 0; n < links; ++n) {
    for (int k = 0; k < cells; ++k) {
      const double d_km = (devices[n].position - layout.centers[k]).norm() / 1000.0;
      const double alpha_db = -(path_loss_db(d_km, params) + shadowing.x_db(k, n));
      const double alpha = std::pow(10.0, alpha_db / 10.0);
      out.alpha(k, n) = alpha;
      out.gain(k, n) = std::norm(fading.h(k, n)) * alpha;
    }
  }
  return out;
}

Eigen::MatrixXd link_gain_matrix(const GainMatrix& gains, std::span<const Association> associations) {
  const int links = static_cast<int>(associations.size());
  Eigen::MatrixXd g(links, links);
  for (int n = 0; n < links; ++n)
    for (int m = 0; m < links; ++m) g(m, n) = gains.gain(associations[m].serving_cell, n);
  return g;
}

}  // namespace marlpc
