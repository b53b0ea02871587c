#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "marlpc/channel.hpp"
#include "test_util.hpp"

using namespace marlpc;
using test_util::batch_mean_se;

TEST_CASE("path loss anchor values") {
  CHECK(path_loss_db(1.0) == doctest::Approx(128.1));
  CHECK(path_loss_db(0.1) == doctest::Approx(90.5));
  CHECK(path_loss_db(0.2) == doctest::Approx(101.819).epsilon(1e-4));
  // below the clamp everything looks like d_min
  CHECK(path_loss_db(1e-6) == doctest::Approx(path_loss_db(0.01)));
  CHECK_THROWS_AS(path_loss_db(std::nan("")), std::invalid_argument);
}

TEST_CASE("shadowing correlation endpoints") {
  CHECK(shadowing_correlation(0.0, 10.0) == doctest::Approx(1.0));
  CHECK(shadowing_correlation(10.0, 10.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(shadowing_correlation(1e9, 10.0) == doctest::Approx(0.0));
}

TEST_CASE("frozen shadowing for a static device") {
  RngStream rng(1, Stream::ShadowingInit);
  ShadowingField field = init_shadowing(3, 4, 10.0, 10.0, rng);
  const Eigen::MatrixXd before = field.x_db;
  std::vector<double> displacement(4, 0.0);
  RngStream step_rng(2, Stream::ShadowingStep);
  for (int t = 0; t < 5; ++t) step_shadowing(field, displacement, step_rng);
  CHECK(field.x_db == before);
}

TEST_CASE("fully decorrelated shadowing redraws at sigma_s") {
  RngStream rng(1, Stream::ShadowingInit);
  ShadowingField field = init_shadowing(1, 1, 10.0, 10.0, rng);
  std::vector<double> displacement{1e9};  // rho ~ 0
  RngStream step_rng(3, Stream::ShadowingStep);
  std::vector<double> samples;
  for (int t = 0; t < 100000; ++t) {
    step_shadowing(field, displacement, step_rng);
    samples.push_back(field.x_db(0, 0));
  }
  std::vector<double> squares(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) squares[i] = samples[i] * samples[i];
  const auto var = batch_mean_se(squares);
  CHECK(std::abs(var.mean - 100.0) <= 3.0 * var.se);
}

TEST_CASE("shadowing AR chain matches its stationary moments") {
  const double d_cor = 10.0, sigma = 10.0;
  const double displacement_per_slot = 2.0;  // rho_s = exp(-0.2)
  const double rho = std::exp(-displacement_per_slot / d_cor);

  RngStream rng(5, Stream::ShadowingInit);
  ShadowingField field = init_shadowing(2, 2, sigma, d_cor, rng);
  std::vector<double> displacement{displacement_per_slot, displacement_per_slot};
  RngStream step_rng(6, Stream::ShadowingStep);

  const int steps = 100000;
  std::vector<double> squares, lag_products;
  double prev = field.x_db(0, 0);
  for (int t = 0; t < steps; ++t) {
    step_shadowing(field, displacement, step_rng);
    const double x = field.x_db(0, 0);
    squares.push_back(x * x);
    lag_products.push_back(prev * x);
    prev = x;
  }
  const auto var = batch_mean_se(squares);
  const auto lag = batch_mean_se(lag_products);
  CHECK(std::abs(var.mean - sigma * sigma) <= 3.0 * var.se);
  // lag-1 autocovariance = rho * variance
  CHECK(std::abs(lag.mean - rho * sigma * sigma) <= 3.0 * lag.se);
}

TEST_CASE("bessel j0 matches the series oracle and the standard library") {
  CHECK(bessel_j0(0.0) == doctest::Approx(1.0));
  CHECK(bessel_j0(1.2566) == doctest::Approx(test_util::series_j0(1.2566)).epsilon(1e-10));
  CHECK(bessel_j0(1.2566) == doctest::Approx(0.6425).epsilon(2e-4));
  CHECK(bessel_j0(2.0944) == doctest::Approx(test_util::series_j0(2.0944)).epsilon(1e-10));
  CHECK(bessel_j0(2.0944) == doctest::Approx(0.1698).epsilon(2e-3));
  for (double x = 0.0; x <= 30.0; x += 0.37)
    CHECK(std::abs(bessel_j0(x) - std::cyl_bessel_j(0, x)) <= 1e-8);
}

TEST_CASE("jakes correlation at the reference speeds") {
  CHECK(jakes_correlation(0.0, 2e9, 0.02) == doctest::Approx(1.0));
  // f_d = 10 Hz corresponds to 1.5 m/s at 2 GHz
  CHECK(jakes_correlation(1.5, 2e9, 0.02) == doctest::Approx(0.6425).epsilon(2e-4));
  CHECK(jakes_correlation(2.5, 2e9, 0.02) == doctest::Approx(0.1698).epsilon(2e-3));
}

TEST_CASE("fading freezes at rho = 1 and redraws at rho = 0") {
  RngStream rng(1, Stream::FadingInit);
  FadingField field = init_fading(2, 3, rng);
  const Eigen::MatrixXcd before = field.h;

  std::vector<double> rho_one(3, 1.0);
  RngStream step_rng(2, Stream::FadingStep);
  step_fading_rho(field, rho_one, step_rng);
  CHECK(field.h == before);

  std::vector<double> rho_zero(3, 0.0);
  std::vector<double> magnitudes;
  for (int t = 0; t < 30000; ++t) {
    step_fading_rho(field, rho_zero, step_rng);
    magnitudes.push_back(std::norm(field.h(0, 0)));
  }
  const auto m = batch_mean_se(magnitudes);
  CHECK(std::abs(m.mean - 1.0) <= 3.0 * m.se);
}

TEST_CASE("fading chain at fixed rho holds unit power and the right lag-1 correlation") {
  const double rho = 0.6425;
  RngStream rng(7, Stream::FadingInit);
  FadingField field = init_fading(1, 1, rng);
  RngStream step_rng(8, Stream::FadingStep);
  std::vector<double> rho_vec{rho};

  const int steps = 100000;
  std::vector<double> power, lag_real;
  std::complex<double> prev = field.h(0, 0);
  for (int t = 0; t < steps; ++t) {
    step_fading_rho(field, rho_vec, step_rng);
    const std::complex<double> h = field.h(0, 0);
    power.push_back(std::norm(h));
    lag_real.push_back(std::real(std::conj(prev) * h));
    prev = h;
  }
  const auto p = batch_mean_se(power);
  const auto l = batch_mean_se(lag_real);
  CHECK(std::abs(p.mean - 1.0) <= 3.0 * p.se);
  CHECK(std::abs(l.mean - rho) <= 3.0 * l.se);
}

TEST_CASE("composed gain at 1 km with unit fading and no shadowing") {
  const CellLayout layout = build_layout(1, 200.0);
  std::vector<DeviceKinematics> devices(1);
  devices[0].position = Vec2(1000.0, 0.0);

  ShadowingField shadowing;
  shadowing.x_db = Eigen::MatrixXd::Zero(1, 1);
  FadingField fading;
  fading.h = Eigen::MatrixXcd::Constant(1, 1, 1.0);

  const GainMatrix g = compose_gains(layout, devices, shadowing, fading, PathLossParams{});
  CHECK(g.gain(0, 0) == doctest::Approx(1.5488e-13).epsilon(1e-3));
  CHECK(g.alpha(0, 0) == g.gain(0, 0));

  fading.h(0, 0) = 0.0;
  const GainMatrix gz = compose_gains(layout, devices, shadowing, fading, PathLossParams{});
  CHECK(gz.gain(0, 0) == 0.0);
}

TEST_CASE("composed gains match scalar recomputation") {
  const CellLayout layout = build_layout(7, 150.0);
  RngStream placement(4, Stream::Placement);
  auto [devices, associations] = init_devices(layout, 9, 2.5, placement);
  RngStream srng(5, Stream::ShadowingInit), frng(6, Stream::FadingInit);
  ShadowingField shadowing = init_shadowing(7, 9, 8.0, 10.0, srng);
  FadingField fading = init_fading(7, 9, frng);
  const PathLossParams pl{};

  const GainMatrix g = compose_gains(layout, devices, shadowing, fading, pl);
  for (int k = 0; k < 7; ++k) {
    for (int n = 0; n < 9; ++n) {
      const double d_km =
          std::max((devices[n].position - layout.centers[k]).norm() / 1000.0, pl.min_distance_km);
      const double pl_db = 128.1 + 37.6 * std::log10(d_km);
      const double alpha = std::pow(10.0, -(pl_db + shadowing.x_db(k, n)) / 10.0);
      const double expected = std::norm(fading.h(k, n)) * alpha;
      CHECK(test_util::close_rel(g.gain(k, n), expected, 1e-12));
    }
  }

  // co-located transmitters (same serving cell) present identical link gains
  const Eigen::MatrixXd link = link_gain_matrix(g, associations);
  for (int m = 0; m < 9; ++m)
    for (int n = 0; n < 9; ++n)
      CHECK(link(m, n) == g.gain(associations[m].serving_cell, n));
}

TEST_CASE("gains stay non-negative across random worlds") {
  const CellLayout layout = build_layout(10, 200.0);
  RngStream placement(9, Stream::Placement);
  auto [devices, associations] = init_devices(layout, 20, 2.5, placement);
  RngStream srng(10, Stream::ShadowingInit), frng(11, Stream::FadingInit);
  ShadowingField shadowing = init_shadowing(10, 20, 10.0, 10.0, srng);
  FadingField fading = init_fading(10, 20, frng);
  const GainMatrix g = compose_gains(layout, devices, shadowing, fading, PathLossParams{});
  CHECK(g.gain.minCoeff() >= 0.0);
  CHECK(g.alpha.minCoeff() > 0.0);
}
