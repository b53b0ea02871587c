#pragma once

#include <Eigen/Dense>
#include <vector>

namespace marlpc {

// Everything a slot leaves behind: powers, rates, per-receiver interference and
// the full link gain matrix, so any later quantity can be recomputed from it.
struct SlotLog {
  long slot = -1;
  std::vector<int> associations;
  Eigen::MatrixXd link_gains;              // (m, n): tx of link m -> rx of link n
  Eigen::VectorXd powers_mw;
  Eigen::VectorXd rates_bps_hz;
  Eigen::VectorXd interference_noise_mw;   // per receiver, includes the noise floor
  Eigen::VectorXd direct_gains;
  double noise_mw = 0;
};

double sinr(const Eigen::MatrixXd& link_gains, const Eigen::VectorXd& powers_mw,
            double noise_mw, int receiver);
double spectral_efficiency(double gamma);  // log2(1 + gamma)

SlotLog make_slot_log(long slot, const Eigen::MatrixXd& link_gains,
                      const Eigen::VectorXd& powers_mw, double noise_mw,
                      std::vector<int> associations);

double sum_rate(const SlotLog& log);
double sum_rate(const Eigen::MatrixXd& link_gains, const Eigen::VectorXd& powers_mw,
                double noise_mw);

// Rate link o loses to link n's transmission: the rate o would have seen with
// p_n = 0, minus its actual rate. Non-negative by construction.
double externality(const SlotLog& log, int n, int o);

struct NeighborEntry {
  int link = -1;      // -1 marks a virtual (padding) neighbor
  double key = 0.0;   // ranking key: received power for interferers, share for interfered
  bool is_virtual() const { return link < 0; }
};

// Threshold-and-cap neighbor sets of one slot. Lists are sorted by descending
// key (ties broken by ascending link index) and padded to exactly `cap`.
struct NeighborSets {
  int cap = 0;
  std::vector<std::vector<NeighborEntry>> interferers;  // I-bar per link
  std::vector<std::vector<NeighborEntry>> interfered;   // O-bar per link
};

NeighborSets compute_neighbor_sets(const SlotLog& prev, double eta, int cap);

// Uncapped interfered sets {o : g(n->o) p_n > eta sigma^2}; drives the reward.
std::vector<std::vector<int>> interfered_links_uncapped(const SlotLog& log, double eta);

// r_n = C_n - sum of externalities over the uncapped interfered set of the
// next slot (all quantities taken from `log`'s slot).
Eigen::VectorXd agent_rewards(const SlotLog& log, double eta);
double agent_reward(const SlotLog& log, const std::vector<int>& interfered_next, int n);

// Per-link neighbor bookkeeping across slots. Keeps the current and previous
// interferer lists and, for the interfered side, the snapshot formed at the
// last slot the link transmitted (t'): membership and received powers freeze
// while the link is silent, shares are re-ranked against fresh interference.
class NeighborTracker {
 public:
  NeighborTracker(int links, double eta, int cap);

  void reset();
  void advance(const SlotLog& prev);

  const std::vector<NeighborEntry>& interferers_now(int n) const { return current_[n]; }
  const std::vector<NeighborEntry>& interferers_prev(int n) const { return previous_[n]; }
  long last_active_slot(int n) const { return snapshots_[n].formed_at; }

  struct InterferedNeighbor {
    int link = -1;
    double share = 0.0;            // stale received power over fresh interference-plus-noise
    double stale_received_mw = 0;  // g(n->o) p_n at slot t'
    bool is_virtual() const { return link < 0; }
  };
  std::vector<InterferedNeighbor> interfered_view(int n, const SlotLog& prev) const;

 private:
  struct Snapshot {
    long formed_at = -1;  // t', the last slot the link transmitted
    std::vector<int> links;
    std::vector<double> received_mw;
  };

  int links_;
  double eta_;
  int cap_;
  std::vector<std::vector<NeighborEntry>> current_, previous_;
  std::vector<Snapshot> snapshots_;
};

}  // namespace marlpc
