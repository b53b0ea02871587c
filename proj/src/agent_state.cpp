#include "marlpc/agent_state.hpp"

#include <cmath>

namespace marlpc {

namespace {
double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }
}  // namespace

double StateNormalization::pmax_mw() const { return from_db(pmax_dbm); }
double StateNormalization::noise_mw() const { return from_db(noise_dbm); }

double StateNormalization::power(double mw) const {
  const double span = pmax_dbm - noise_dbm;
  if (mw <= 0) return -floor_margin;
  const double v = (to_db(mw) - noise_dbm) / span;
  return std::max(v, -floor_margin);
}

double StateNormalization::power_inverse(double normalized) const {
  return from_db(noise_dbm + normalized * (pmax_dbm - noise_dbm));
}

double StateNormalization::gain(double linear) const { return power(linear * pmax_mw()); }

StateBuilder::StateBuilder(StateLayout layout, StateNormalization norm, double noise_mw,
                           double virtual_rate_sentinel)
    : layout_(layout), norm_(norm), noise_mw_(noise_mw), sentinel_rate_(virtual_rate_sentinel) {}

Eigen::VectorXd StateBuilder::build(int n, long slot, const Eigen::MatrixXd& current_gains,
                                    const SlotLog* prev, const SlotLog* prev2,
                                    const NeighborTracker& tracker,
                                    std::vector<PortProvenance>* provenance) const {
  const int cap = layout_.neighbor_cap;
  Eigen::VectorXd state(layout_.dimension());
  int port = 0;

  auto emit = [&](const char* name, long src_slot, int src_link, double raw, double normalized) {
    state(port++) = normalized;
    if (provenance) provenance->push_back({name, src_slot, src_link, raw, normalized});
  };

  // local information (6 ports)
  const double p_prev = prev ? prev->powers_mw(n) : 0.0;
  const double c_prev = prev ? prev->rates_bps_hz(n) : 0.0;
  const double g_now = current_gains(n, n);
  const double g_prev = prev ? prev->direct_gains(n) : 0.0;
  const double ipn_prev = prev ? prev->interference_noise_mw(n) : noise_mw_;
  const double ipn_prev2 = prev2 ? prev2->interference_noise_mw(n) : noise_mw_;
  emit("tx_power", prev ? prev->slot : -1, n, p_prev, norm_.power(p_prev));
  emit("rate", prev ? prev->slot : -1, n, c_prev, norm_.rate(c_prev));
  emit("direct_gain", slot, n, g_now, norm_.gain(g_now));
  emit("direct_gain_prev", prev ? prev->slot : -1, n, g_prev, norm_.gain(g_prev));
  emit("interference_noise", prev ? prev->slot : -1, n, ipn_prev, norm_.power(ipn_prev));
  emit("interference_noise_prev", prev2 ? prev2->slot : -1, n, ipn_prev2, norm_.power(ipn_prev2));

  // current interferers: fresh gain toward n, last-slot rate and power (3 per slot-t entry)
  for (int j = 0; j < cap; ++j) {
    const NeighborEntry& e = tracker.interferers_now(n)[j];
    if (e.is_virtual() || !prev) {
      emit("in_received", -1, -1, 0.0, norm_.power(0.0));
      emit("in_rate", -1, -1, sentinel_rate_, norm_.rate(sentinel_rate_));
      emit("in_power", -1, -1, 0.0, norm_.power(0.0));
    } else {
      const int i = e.link;
      const double received = current_gains(i, n) * prev->powers_mw(i);
      emit("in_received", slot, i, received, norm_.power(received));
      emit("in_rate", prev->slot, i, prev->rates_bps_hz(i), norm_.rate(prev->rates_bps_hz(i)));
      emit("in_power", prev->slot, i, prev->powers_mw(i), norm_.power(prev->powers_mw(i)));
    }
  }
  // previous interferer list with the quantities it was formed from
  for (int j = 0; j < cap; ++j) {
    const NeighborEntry& e = tracker.interferers_prev(n)[j];
    if (e.is_virtual() || !prev) {
      emit("in_hist_received", -1, -1, 0.0, norm_.power(0.0));
      emit("in_hist_rate", -1, -1, sentinel_rate_, norm_.rate(sentinel_rate_));
      emit("in_hist_power", -1, -1, 0.0, norm_.power(0.0));
    } else {
      const int i = e.link;
      const double p_i = prev2 ? prev2->powers_mw(i) : 0.0;
      const double c_i = prev2 ? prev2->rates_bps_hz(i) : 0.0;
      const double received = prev->link_gains(i, n) * p_i;
      emit("in_hist_received", prev->slot, i, received, norm_.power(received));
      emit("in_hist_rate", prev2 ? prev2->slot : -1, i, c_i, norm_.rate(c_i));
      emit("in_hist_power", prev2 ? prev2->slot : -1, i, p_i, norm_.power(p_i));
    }
  }

  // interfered neighbors (4 per entry): fresh direct gain and rate of o, the
  // stale-over-fresh share, and the stale received power itself
  std::vector<NeighborTracker::InterferedNeighbor> interfered;
  if (prev) interfered = tracker.interfered_view(n, *prev);
  for (int j = 0; j < cap; ++j) {
    const bool virt = !prev || interfered[j].is_virtual();
    if (virt) {
      emit("out_direct_gain", -1, -1, 0.0, norm_.gain(0.0));
      emit("out_rate", -1, -1, sentinel_rate_, norm_.rate(sentinel_rate_));
      emit("out_share", -1, -1, 0.0, 0.0);
      emit("out_received", -1, -1, 0.0, norm_.power(0.0));
    } else {
      const auto& o = interfered[j];
      emit("out_direct_gain", prev->slot, o.link, prev->direct_gains(o.link),
           norm_.gain(prev->direct_gains(o.link)));
      emit("out_rate", prev->slot, o.link, prev->rates_bps_hz(o.link),
           norm_.rate(prev->rates_bps_hz(o.link)));
      emit("out_share", tracker.last_active_slot(n), o.link, o.share, o.share);
      emit("out_received", tracker.last_active_slot(n), o.link, o.stale_received_mw,
           norm_.power(o.stale_received_mw));
    }
  }

  return state;
}

}  // namespace marlpc
