#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "marlpc/netsim.hpp"

namespace marlpc {

// Deterministic, state-free feature scaling anchored on the configured power
// budget and noise floor: full power maps to 1, the noise floor to 0, and a
// zero (or absurdly small) power clamps to -floor_margin. Rates divide by a
// fixed scale. No running statistics, so the mapping never drifts.
struct StateNormalization {
  double pmax_dbm = 38.0;
  double noise_dbm = -114.0;
  double rate_scale_bps_hz = 10.0;
  double floor_margin = 0.25;

  double pmax_mw() const;
  double noise_mw() const;

  double power(double mw) const;
  double power_inverse(double normalized) const;  // bijective above the floor
  double gain(double linear) const;               // treated as received power at full power
  double rate(double bps_hz) const { return bps_hz / rate_scale_bps_hz; }
  double rate_inverse(double normalized) const { return normalized * rate_scale_bps_hz; }
};

struct StateLayout {
  int neighbor_cap = 5;
  int dimension() const { return 6 + 10 * neighbor_cap; }
};

// Provenance of one input port; reconstructible for audit and debug dumps.
struct PortProvenance {
  std::string name;
  long slot = -1;      // slot the raw quantity belongs to, -1 for padding
  int source_link = -1;
  double raw = 0;
  double normalized = 0;
};

// Builds the per-agent observation from delayed measurements: six local ports,
// 3 * cap ports for each of the current and previous interferer lists, and
// 4 * cap ports for the interfered side. Only the direct gain and interferer
// gains of the current slot are read at slot t; everything else is slot t-1
// or older.
class StateBuilder {
 public:
  StateBuilder(StateLayout layout, StateNormalization norm, double noise_mw,
               double virtual_rate_sentinel = -1.0);

  const StateLayout& layout() const { return layout_; }

  // prev / prev2 may be null at bootstrap; current_gains is the slot-t link
  // gain matrix (only column/diagonal entries for receiver n are read).
  Eigen::VectorXd build(int n, long slot, const Eigen::MatrixXd& current_gains,
                        const SlotLog* prev, const SlotLog* prev2, const NeighborTracker& tracker,
                        std::vector<PortProvenance>* provenance = nullptr) const;

 private:
  StateLayout layout_;
  StateNormalization norm_;
  double noise_mw_;
  double sentinel_rate_;
};

}  // namespace marlpc
