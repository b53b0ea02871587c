#include "marlpc/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace marlpc {

namespace {
constexpr double kLn2 = std::numbers::ln2;

void sort_and_pad(std::vector<NeighborEntry>& entries, int cap) {
  // input is in ascending link order, so a stable sort keeps index ties ascending
  std::stable_sort(entries.begin(), entries.end(),
                   [](const NeighborEntry& a, const NeighborEntry& b) { return a.key > b.key; });
  if (static_cast<int>(entries.size()) > cap) entries.resize(cap);
  while (static_cast<int>(entries.size()) < cap) entries.push_back(NeighborEntry{});
}
}  // namespace

double sinr(const Eigen::MatrixXd& link_gains, const Eigen::VectorXd& powers_mw,
            double noise_mw, int receiver) {
  const int links = static_cast<int>(powers_mw.size());
  double interference = 0;
  for (int m = 0; m < links; ++m)
    if (m != receiver) interference += link_gains(m, receiver) * powers_mw(m);
  return link_gains(receiver, receiver) * powers_mw(receiver) / (interference + noise_mw);
}

double spectral_efficiency(double gamma) { return std::log1p(gamma) / kLn2; }

SlotLog make_slot_log(long slot, const Eigen::MatrixXd& link_gains,
                      const Eigen::VectorXd& powers_mw, double noise_mw,
                      std::vector<int> associations) {
  const int links = static_cast<int>(powers_mw.size());
  if (link_gains.rows() != links || link_gains.cols() != links)
    throw std::invalid_argument("make_slot_log: gain matrix shape mismatch");

  SlotLog log;
  log.slot = slot;
  log.associations = std::move(associations);
  log.link_gains = link_gains;
  log.powers_mw = powers_mw;
  log.noise_mw = noise_mw;
  log.direct_gains = link_gains.diagonal();

  const Eigen::VectorXd received = link_gains.transpose() * powers_mw;  // total power per receiver
  const Eigen::VectorXd signal = log.direct_gains.cwiseProduct(powers_mw);
  log.interference_noise_mw = (received - signal).array() + noise_mw;
  log.rates_bps_hz.resize(links);
  for (int n = 0; n < links; ++n)
    log.rates_bps_hz(n) = spectral_efficiency(signal(n) / log.interference_noise_mw(n));
  return log;
}

double sum_rate(const SlotLog& log) { return log.rates_bps_hz.sum(); }

double sum_rate(const Eigen::MatrixXd& link_gains, const Eigen::VectorXd& powers_mw,
                double noise_mw) {
  const int links = static_cast<int>(powers_mw.size());
  double total = 0;
  for (int n = 0; n < links; ++n)
    total += spectral_efficiency(sinr(link_gains, powers_mw, noise_mw, n));
  return total;
}

double externality(const SlotLog& log, int n, int o) {
  if (n == o) throw std::invalid_argument("externality: n and o must differ");
  const double signal = log.direct_gains(o) * log.powers_mw(o);
  const double with_n = log.interference_noise_mw(o);
  const double without_n = with_n - log.link_gains(n, o) * log.powers_mw(n);
  const double pi = spectral_efficiency(signal / without_n) - log.rates_bps_hz(o);
  return std::max(0.0, pi);
}

NeighborSets compute_neighbor_sets(const SlotLog& prev, double eta, int cap) {
  const int links = static_cast<int>(prev.powers_mw.size());
  const double threshold = eta * prev.noise_mw;

  NeighborSets sets;
  sets.cap = cap;
  sets.interferers.resize(links);
  sets.interfered.resize(links);

  for (int n = 0; n < links; ++n) {
    for (int i = 0; i < links; ++i) {
      if (i == n) continue;
      const double received = prev.link_gains(i, n) * prev.powers_mw(i);
      if (received > threshold) sets.interferers[n].push_back({i, received});
    }
    sort_and_pad(sets.interferers[n], cap);

    for (int o = 0; o < links; ++o) {
      if (o == n) continue;
      const double received = prev.link_gains(n, o) * prev.powers_mw(n);
      if (received > threshold)
        sets.interfered[n].push_back({o, received / prev.interference_noise_mw(o)});
    }
    sort_and_pad(sets.interfered[n], cap);
  }
  return sets;
}

std::vector<std::vector<int>> interfered_links_uncapped(const SlotLog& log, double eta) {
  const int links = static_cast<int>(log.powers_mw.size());
  const double threshold = eta * log.noise_mw;
  std::vector<std::vector<int>> out(links);
  for (int n = 0; n < links; ++n)
    for (int o = 0; o < links; ++o)
      if (o != n && log.link_gains(n, o) * log.powers_mw(n) > threshold) out[n].push_back(o);
  return out;
}

double agent_reward(const SlotLog& log, const std::vector<int>& interfered_next, int n) {
  double penalty = 0;
  for (int o : interfered_next) penalty += externality(log, n, o);
  return log.rates_bps_hz(n) - penalty;
}

Eigen::VectorXd agent_rewards(const SlotLog& log, double eta) {
  const auto interfered = interfered_links_uncapped(log, eta);
  const int links = static_cast<int>(log.powers_mw.size());
  Eigen::VectorXd rewards(links);
  for (int n = 0; n < links; ++n) rewards(n) = agent_reward(log, interfered[n], n);
  return rewards;
}

NeighborTracker::NeighborTracker(int links, double eta, int cap)
    : links_(links), eta_(eta), cap_(cap) {
  reset();
}

void NeighborTracker::reset() {
  current_.assign(links_, std::vector<NeighborEntry>(cap_));
  previous_.assign(links_, std::vector<NeighborEntry>(cap_));
  snapshots_.assign(links_, Snapshot{});
}

void NeighborTracker::advance(const SlotLog& prev) {
  const NeighborSets sets = compute_neighbor_sets(prev, eta_, cap_);
  previous_ = std::move(current_);
  current_ = sets.interferers;

  const double threshold = eta_ * prev.noise_mw;
  for (int n = 0; n < links_; ++n) {
    if (prev.powers_mw(n) <= 0) continue;  // silent: keep the t' snapshot
    Snapshot& snap = snapshots_[n];
    snap.formed_at = prev.slot;
    snap.links.clear();
    snap.received_mw.clear();
    for (int o = 0; o < links_; ++o) {
      if (o == n) continue;
      const double received = prev.link_gains(n, o) * prev.powers_mw(n);
      if (received > threshold) {
        snap.links.push_back(o);
        snap.received_mw.push_back(received);
      }
    }
  }
}

std::vector<NeighborTracker::InterferedNeighbor> NeighborTracker::interfered_view(
    int n, const SlotLog& prev) const {
  const Snapshot& snap = snapshots_[n];
  std::vector<InterferedNeighbor> view;
  view.reserve(snap.links.size());
  for (std::size_t j = 0; j < snap.links.size(); ++j) {
    const int o = snap.links[j];
    view.push_back({o, snap.received_mw[j] / prev.interference_noise_mw(o), snap.received_mw[j]});
  }
  std::stable_sort(view.begin(), view.end(),
                   [](const InterferedNeighbor& a, const InterferedNeighbor& b) {
                     return a.share > b.share;
                   });
  if (static_cast<int>(view.size()) > cap_) view.resize(cap_);
  while (static_cast<int>(view.size()) < cap_) view.push_back(InterferedNeighbor{});
  return view;
}

}  // namespace marlpc
