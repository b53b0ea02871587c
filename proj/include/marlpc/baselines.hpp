#pragma once

#include <Eigen/Dense>
#include <vector>

#include "marlpc/rng.hpp"

namespace marlpc {

struct AllocatorResult {
  Eigen::VectorXd powers_mw;
  int iterations = 0;
  std::vector<double> objective_trace;  // sum-rate (bps/Hz) after each iteration
};

Eigen::VectorXd full_power(int links, double pmax_mw);
Eigen::VectorXd random_power(int links, double pmax_mw, RngStream& rng);

// Scalar weighted-MMSE sum-rate iteration over receiver coefficients, MMSE
// weights and transmit amplitudes, started from full power. Stops when the
// sum-rate changes by less than `tol` or after `max_iter` rounds.
AllocatorResult wmmse(const Eigen::MatrixXd& link_gains, double pmax_mw, double noise_mw,
                      double tol = 1e-4, int max_iter = 500);

// Closed-form fractional-programming iteration (quadratic transform over the
// SINR ratios), full-power start, same stopping rule.
AllocatorResult fp(const Eigen::MatrixXd& link_gains, double pmax_mw, double noise_mw,
                   double tol = 1e-4, int max_iter = 500);

// FP driven by one-slot-stale gains: powers for the current slot are solved on
// the previously observed matrix (full power before any history exists).
class DelayedFp {
 public:
  DelayedFp(double pmax_mw, double noise_mw, double tol = 1e-4, int max_iter = 500);
  Eigen::VectorXd next(const Eigen::MatrixXd& current_gains);

 private:
  double pmax_mw_, noise_mw_, tol_;
  int max_iter_;
  bool has_prev_ = false;
  Eigen::MatrixXd prev_gains_;
};

// Exhaustive lattice search over [0, pmax]^N, N <= 3. Optional refinement
// passes re-grid around the incumbent with shrinking spans, tightening the
// estimate well below the coarse lattice spacing.
struct GridOracleResult {
  Eigen::VectorXd powers_mw;
  double objective = 0;
};

GridOracleResult grid_oracle(const Eigen::MatrixXd& link_gains, double pmax_mw, double noise_mw,
                             int grid_points, int refine_passes = 0);

}  // namespace marlpc
