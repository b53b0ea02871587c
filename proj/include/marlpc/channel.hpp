#pragma once

#include <Eigen/Dense>
#include <span>

#include "marlpc/geometry.hpp"
#include "marlpc/rng.hpp"

namespace marlpc {

inline constexpr double kSpeedOfLightMps = 3.0e8;

struct PathLossParams {
  double const_db = 128.1;
  double slope_db_per_decade = 37.6;  // applied to log10(distance in km)
  double min_distance_km = 0.01;      // clamp below to avoid the log singularity
};

// LTE-style macro path loss in dB at a transmitter-receiver distance in km.
double path_loss_db(double distance_km, const PathLossParams& params = {});

// Gudmundson decorrelation: rho = exp(-displacement / d_cor).
double shadowing_correlation(double displacement_m, double d_cor_m);

// Zeroth-order Bessel function of the first kind: power series for |x| <= 8,
// Hankel asymptotic expansion beyond; absolute error <= 1e-8.
double bessel_j0(double x);

// AR(1) coefficient of consecutive fading samples, J0(2 pi f_d T) with
// f_d = speed * carrier / c.
double jakes_correlation(double speed_mps, double carrier_hz, double slot_duration_s);

// Log-normal shadowing toward every cell center, one AR(1) chain per
// (cell, device) entry; the correlation is shared across cells for a device.
struct ShadowingField {
  Eigen::MatrixXd x_db;  // cells x links
  double sigma_db = 10.0;
  double d_cor_m = 10.0;
};

ShadowingField init_shadowing(int cells, int links, double sigma_db, double d_cor_m,
                              RngStream& rng);
void step_shadowing(ShadowingField& field, std::span<const double> displacement_m,
                    RngStream& rng);

// Rayleigh small-scale fading as a first-order complex Gauss-Markov process with
// unit stationary variance.
struct FadingField {
  Eigen::MatrixXcd h;  // cells x links
};

FadingField init_fading(int cells, int links, RngStream& rng);
void step_fading_rho(FadingField& field, std::span<const double> rho_per_device, RngStream& rng);
void step_fading(FadingField& field, std::span<const double> doppler_hz, double slot_duration_s,
                 RngStream& rng);

// Composed linear gains: alpha from -(PL + X) dB, gain = |h|^2 * alpha.
struct GainMatrix {
  Eigen::MatrixXd alpha;  // cells x links, linear scale
  Eigen::MatrixXd gain;   // cells x links, linear scale
};

GainMatrix compose_gains(const CellLayout& layout, std::span<const DeviceKinematics> devices,
                         const ShadowingField& shadowing, const FadingField& fading,
                         const PathLossParams& params);

// Link-level N x N gain matrix: entry (m, n) is the gain from link m's serving
// cell transmitter to link n's receiver.
Eigen::MatrixXd link_gain_matrix(const GainMatrix& gains, std::span<const Association> associations);

}  // namespace marlpc
