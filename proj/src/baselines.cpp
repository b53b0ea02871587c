#include "marlpc/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "marlpc/netsim.hpp"

namespace marlpc {

namespace {

void check_gains(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols()) throw std::invalid_argument("allocator: gain matrix must be square");
  if (!g.allFinite()) throw std::invalid_argument("allocator: non-finite gains");
  if (g.minCoeff() < 0) throw std::invalid_argument("allocator: negative gains");
  for (int n = 0; n < g.rows(); ++n)
    if (g(n, n) <= 0) throw std::invalid_argument("allocator: non-positive direct gain");
}

}  // namespace

Eigen::VectorXd full_power(int links, double pmax_mw) {
  return Eigen::VectorXd::Constant(links, pmax_mw);
}

Eigen::VectorXd random_power(int links, double pmax_mw, RngStream& rng) {
  Eigen::VectorXd p(links);
  for (int n = 0; n < links; ++n) p(n) = rng.uniform(0.0, pmax_mw);
  return p;
}

AllocatorResult wmmse(const Eigen::MatrixXd& g, double pmax_mw, double noise_mw, double tol,
                      int max_iter) {
  check_gains(g);
  const int links = static_cast<int>(g.rows());
  const double vmax = std::sqrt(pmax_mw);
  const Eigen::VectorXd root_direct = g.diagonal().cwiseSqrt();

  Eigen::VectorXd v = Eigen::VectorXd::Constant(links, vmax);
  Eigen::VectorXd u(links), w(links);

  AllocatorResult result;
  double prev_obj = sum_rate(g, v.cwiseProduct(v), noise_mw);

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd v2 = v.cwiseProduct(v);
    for (int n = 0; n < links; ++n) {
      double received = noise_mw;
      for (int m = 0; m < links; ++m) received += g(m, n) * v2(m);
      u(n) = root_direct(n) * v(n) / received;
    }
    for (int n = 0; n < links; ++n) w(n) = 1.0 / (1.0 - u(n) * root_direct(n) * v(n));
    for (int n = 0; n < links; ++n) {
      double denom = 0;
      for (int m = 0; m < links; ++m) denom += w(m) * u(m) * u(m) * g(n, m);
      v(n) = std::clamp(w(n) * u(n) * root_direct(n) / denom, 0.0, vmax);
    }

    const double obj = sum_rate(g, v.cwiseProduct(v), noise_mw);
    result.objective_trace.push_back(obj);
    result.iterations = it;
    if (std::abs(obj - prev_obj) < tol) break;
    prev_obj = obj;
  }
  result.powers_mw = v.cwiseProduct(v);
  return result;
}

AllocatorResult fp(const Eigen::MatrixXd& g, double pmax_mw, double noise_mw, double tol,
                   int max_iter) {
  check_gains(g);
  const int links = static_cast<int>(g.rows());

  Eigen::VectorXd p = Eigen::VectorXd::Constant(links, pmax_mw);
  Eigen::VectorXd gamma(links), y(links);

  AllocatorResult result;
  double prev_obj = sum_rate(g, p, noise_mw);

  for (int it = 1; it <= max_iter; ++it) {
    for (int n = 0; n < links; ++n) {
      double received = noise_mw;
      for (int m = 0; m < links; ++m) received += g(m, n) * p(m);
      const double signal = g(n, n) * p(n);
      gamma(n) = signal / (received - signal);
      y(n) = std::sqrt((1.0 + gamma(n)) * signal) / received;
    }
    for (int n = 0; n < links; ++n) {
      double denom = 0;
      for (int m = 0; m < links; ++m) denom += y(m) * y(m) * g(n, m);
      p(n) = std::clamp(y(n) * y(n) * (1.0 + gamma(n)) * g(n, n) / (denom * denom), 0.0, pmax_mw);
    }

    const double obj = sum_rate(g, p, noise_mw);
    result.objective_trace.push_back(obj);
    result.iterations = it;
    if (std::abs(obj - prev_obj) < tol) break;
    prev_obj = obj;
  }
  result.powers_mw = p;
  return result;
}

DelayedFp::DelayedFp(double pmax_mw, double noise_mw, double tol, int max_iter)
    : pmax_mw_(pmax_mw), noise_mw_(noise_mw), tol_(tol), max_iter_(max_iter) {}

Eigen::VectorXd DelayedFp::next(const Eigen::MatrixXd& current_gains) {
  Eigen::VectorXd p;
  if (has_prev_)
    p = fp(prev_gains_, pmax_mw_, noise_mw_, tol_, max_iter_).powers_mw;
  else
    p = full_power(static_cast<int>(current_gains.rows()), pmax_mw_);
  prev_gains_ = current_gains;
  has_prev_ = true;
  return p;
}

GridOracleResult grid_oracle(const Eigen::MatrixXd& g, double pmax_mw, double noise_mw,
                             int grid_points, int refine_passes) {
  check_gains(g);
  const int links = static_cast<int>(g.rows());
  if (links > 3) throw std::invalid_argument("grid_oracle: only N <= 3 is tractable");
  if (grid_points < 2) throw std::invalid_argument("grid_oracle: need at least 2 grid points");

  Eigen::VectorXd lo = Eigen::VectorXd::Zero(links);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(links, pmax_mw);

  GridOracleResult best;
  best.powers_mw = Eigen::VectorXd::Zero(links);
  best.objective = -1;

  for (int pass = 0; pass <= refine_passes; ++pass) {
    const int pts = pass == 0 ? grid_points : 21;
    Eigen::VectorXd p(links);
    std::vector<int> idx(links, 0);
    while (true) {
      for (int n = 0; n < links; ++n)
        p(n) = lo(n) + (hi(n) - lo(n)) * idx[n] / static_cast<double>(pts - 1);
      const double obj = sum_rate(g, p, noise_mw);
      if (obj > best.objective) {
        best.objective = obj;
        best.powers_mw = p;
      }
      int carry = 0;
      while (carry < links && ++idx[carry] == pts) idx[carry++] = 0;
      if (carry == links) break;
    }
    // shrink the window to one coarse cell around the incumbent
    for (int n = 0; n < links; ++n) {
      const double span = (hi(n) - lo(n)) / static_cast<double>(pts - 1);
      lo(n) = std::max(0.0, best.powers_mw(n) - span);
      hi(n) = std::min(pmax_mw, best.powers_mw(n) + span);
    }
  }
  return best;
}

}  // namespace marlpc
