#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "marlpc/netsim.hpp"
#include "marlpc/rng.hpp"
#include "test_util.hpp"

using namespace marlpc;

namespace {

Eigen::MatrixXd random_gains(int links, RngStream& rng, double direct_scale = 1.0,
                             double cross_scale = 0.2) {
  Eigen::MatrixXd g(links, links);
  for (int m = 0; m < links; ++m)
    for (int n = 0; n < links; ++n) {
      const double base = m == n ? direct_scale : cross_scale;
      g(m, n) = base * std::pow(10.0, rng.uniform(-1.0, 1.0));
    }
  return g;
}

}  // namespace

TEST_CASE("sinr of a single link is signal over noise") {
  Eigen::MatrixXd g(1, 1);
  g << 4.0;
  Eigen::VectorXd p(1);
  p << 1.0;
  CHECK(sinr(g, p, 1.0, 0) == doctest::Approx(4.0));
  p(0) = 0.0;
  CHECK(sinr(g, p, 1.0, 0) == doctest::Approx(0.0));
}

TEST_CASE("slot log matches direct summation on a random 3-link instance") {
  RngStream rng(21, Stream::Instance);
  const Eigen::MatrixXd g = random_gains(3, rng);
  Eigen::VectorXd p(3);
  p << 0.3, 0.9, 0.5;
  const double noise = 0.01;
  const SlotLog log = make_slot_log(0, g, p, noise, {0, 1, 2});

  for (int n = 0; n < 3; ++n) {
    double interference = noise;
    for (int m = 0; m < 3; ++m)
      if (m != n) interference += g(m, n) * p(m);
    const double gamma = g(n, n) * p(n) / interference;
    CHECK(test_util::close_rel(log.interference_noise_mw(n), interference, 1e-12));
    CHECK(test_util::close_rel(log.rates_bps_hz(n), std::log2(1.0 + gamma), 1e-12));
    CHECK(test_util::close_rel(sinr(g, p, noise, n), gamma, 1e-12));
  }
}

TEST_CASE("spectral efficiency anchor values") {
  CHECK(spectral_efficiency(0.0) == doctest::Approx(0.0));
  CHECK(spectral_efficiency(4.0) == doctest::Approx(std::log2(5.0)).epsilon(1e-12));
  CHECK(spectral_efficiency(5.0) == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
}

TEST_CASE("sum rate over identical isolated links") {
  const int links = 4;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(links, links);
  g.diagonal().setConstant(4.0);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(links);
  const SlotLog log = make_slot_log(0, g, p, 1.0, std::vector<int>(links, 0));
  CHECK(sum_rate(log) == doctest::Approx(links * std::log2(5.0)).epsilon(1e-12));

  const SlotLog zero = make_slot_log(0, g, Eigen::VectorXd::Zero(links), 1.0,
                                     std::vector<int>(links, 0));
  CHECK(sum_rate(zero) == doctest::Approx(0.0));
}

TEST_CASE("neighbor threshold keeps 6 sigma^2 and drops 4 sigma^2 at eta = 5") {
  const double noise = 1.0;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g.diagonal().setConstant(10.0);
  g(1, 0) = 6.0;  // link 1 -> receiver 0 above threshold
  g(2, 0) = 4.0;  // below
  Eigen::VectorXd p = Eigen::VectorXd::Ones(3);
  const SlotLog log = make_slot_log(3, g, p, noise, {0, 1, 2});
  const NeighborSets sets = compute_neighbor_sets(log, 5.0, 2);

  REQUIRE(sets.interferers[0].size() == 2);
  CHECK(sets.interferers[0][0].link == 1);
  CHECK(sets.interferers[0][1].is_virtual());  // padded to the cap
  CHECK(sets.interfered[1][0].link == 0);
  CHECK(sets.interfered[2][0].is_virtual());
}

TEST_CASE("neighbor ordering matches a brute-force sort oracle") {
  RngStream rng(33, Stream::Instance);
  const int links = 20, cap = 5;
  const double noise = 1e-3, eta = 5.0;
  const Eigen::MatrixXd g = random_gains(links, rng, 5.0, 1.0);
  Eigen::VectorXd p(links);
  for (int n = 0; n < links; ++n) p(n) = rng.uniform();
  const SlotLog log = make_slot_log(7, g, p, noise, std::vector<int>(links, 0));
  const NeighborSets sets = compute_neighbor_sets(log, eta, cap);

  for (int n = 0; n < links; ++n) {
    // oracle: full sort of qualifying interferers by received power, stable on index
    std::vector<std::pair<double, int>> oracle;
    for (int i = 0; i < links; ++i) {
      if (i == n) continue;
      const double received = g(i, n) * p(i);
      if (received > eta * noise) oracle.push_back({received, i});
    }
    std::stable_sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (int j = 0; j < cap; ++j) {
      if (j < static_cast<int>(oracle.size())) {
        CHECK(sets.interferers[n][j].link == oracle[j].second);
        CHECK(sets.interferers[n][j].key == doctest::Approx(oracle[j].first));
      } else {
        CHECK(sets.interferers[n][j].is_virtual());
      }
    }
  }
}

TEST_CASE("externality identities") {
  const double noise = 1.0;

  SUBCASE("silent or disconnected interferer causes zero externality") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g.diagonal().setConstant(10.0);
    Eigen::VectorXd p(2);
    p << 0.0, 1.0;
    const SlotLog log = make_slot_log(0, g, p, noise, {0, 1});
    CHECK(externality(log, 0, 1) == doctest::Approx(0.0));  // p_0 = 0
    CHECK(externality(log, 1, 0) == doctest::Approx(0.0));  // g(1->0) = 0
  }

  SUBCASE("two-link arithmetic case") {
    // g_oo p_o = 10 sigma^2, g_no p_n = sigma^2 -> pi = log2(11) - log2(6)
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g(1, 1) = 10.0;
    g(0, 1) = 1.0;
    g(0, 0) = 1.0;
    Eigen::VectorXd p = Eigen::VectorXd::Ones(2);
    const SlotLog log = make_slot_log(0, g, p, noise, {0, 1});
    CHECK(externality(log, 0, 1) ==
          doctest::Approx(std::log2(11.0) - std::log2(6.0)).epsilon(1e-12));
  }
}

TEST_CASE("rewards equal the leave-one-out oracle on random 5-link slots") {
  RngStream rng(44, Stream::Instance);
  const double noise = 1e-2, eta = 5.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd g = random_gains(5, rng, 3.0, 0.8);
    Eigen::VectorXd p(5);
    for (int n = 0; n < 5; ++n) p(n) = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    const SlotLog log = make_slot_log(trial, g, p, noise, std::vector<int>(5, 0));
    const Eigen::VectorXd rewards = agent_rewards(log, eta);

    for (int n = 0; n < 5; ++n) {
      // oracle: recompute each interfered receiver's rate with p_n zeroed
      double penalty = 0;
      for (int o = 0; o < 5; ++o) {
        if (o == n || g(n, o) * p(n) <= eta * noise) continue;
        Eigen::VectorXd p_without = p;
        p_without(n) = 0.0;
        const double c_without = spectral_efficiency(sinr(g, p_without, noise, o));
        penalty += c_without - log.rates_bps_hz(o);
      }
      const double expected = log.rates_bps_hz(n) - penalty;
      CHECK(std::abs(rewards(n) - expected) <= 1e-10);
      CHECK(rewards(n) <= log.rates_bps_hz(n) + 1e-12);  // reward never exceeds own rate
    }
  }
}

TEST_CASE("externality is non-negative and power monotonicity holds") {
  RngStream rng(55, Stream::Instance);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd g = random_gains(6, rng, 2.0, 0.6);
    Eigen::VectorXd p(6);
    for (int n = 0; n < 6; ++n) p(n) = rng.uniform();
    const double noise = 0.05;
    const SlotLog log = make_slot_log(0, g, p, noise, std::vector<int>(6, 0));

    for (int n = 0; n < 6; ++n)
      for (int o = 0; o < 6; ++o)
        if (n != o) CHECK(externality(log, n, o) >= 0.0);

    // raising only p_n strictly increases gamma_n, weakly decreases the others
    const int n = static_cast<int>(rng.integer(6));
    Eigen::VectorXd p_up = p;
    p_up(n) += 0.5;
    for (int m = 0; m < 6; ++m) {
      const double before = sinr(g, p, noise, m);
      const double after = sinr(g, p_up, noise, m);
      if (m == n)
        CHECK(after > before);
      else
        CHECK(after <= before + 1e-15);
    }
  }
}

TEST_CASE("uncapped neighbor sets are symmetric: o interfered by n iff n interferes o") {
  RngStream rng(66, Stream::Instance);
  const Eigen::MatrixXd g = random_gains(8, rng, 2.0, 0.7);
  Eigen::VectorXd p(8);
  for (int n = 0; n < 8; ++n) p(n) = rng.uniform();
  const SlotLog log = make_slot_log(0, g, p, 0.05, std::vector<int>(8, 0));
  const auto interfered = interfered_links_uncapped(log, 5.0);
  const NeighborSets sets = compute_neighbor_sets(log, 5.0, 8);  // cap >= N keeps all

  for (int n = 0; n < 8; ++n) {
    for (int o : interfered[n]) {
      bool found = false;
      for (const auto& e : sets.interferers[o])
        if (e.link == n) found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("neighbor tracker freezes the interfered snapshot while silent") {
  const double noise = 1.0, eta = 5.0;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g.diagonal().setConstant(100.0);
  g(0, 1) = 10.0;  // link 0 interferes receiver 1 strongly
  g(0, 2) = 7.0;

  NeighborTracker tracker(3, eta, 2);
  Eigen::VectorXd p_active = Eigen::VectorXd::Ones(3);
  const SlotLog active = make_slot_log(5, g, p_active, noise, {0, 1, 2});
  tracker.advance(active);
  CHECK(tracker.last_active_slot(0) == 5);
  auto view = tracker.interfered_view(0, active);
  REQUIRE(view.size() == 2);
  CHECK(view[0].link == 1);
  CHECK(view[1].link == 2);
  const double frozen_received = view[0].stale_received_mw;

  // link 0 goes silent; membership and numerators freeze at t' = 5
  Eigen::VectorXd p_silent = p_active;
  p_silent(0) = 0.0;
  const SlotLog silent = make_slot_log(6, g, p_silent, noise, {0, 1, 2});
  tracker.advance(silent);
  CHECK(tracker.last_active_slot(0) == 5);
  auto frozen = tracker.interfered_view(0, silent);
  CHECK(frozen[0].link == 1);
  CHECK(frozen[0].stale_received_mw == frozen_received);
  // the share denominator is fresh: receiver 1 no longer hears link 0
  CHECK(frozen[0].share == doctest::Approx(frozen_received / silent.interference_noise_mw(1)));

  // interferer lists always refresh: receiver 1 no longer lists link 0
  bool listed = false;
  for (const auto& e : tracker.interferers_now(1))
    if (e.link == 0) listed = true;
  CHECK(!listed);
}

TEST_CASE("virtual neighbors never contribute to sums") {
  NeighborTracker tracker(2, 5.0, 3);
  for (int n = 0; n < 2; ++n) {
    double total = 0;
    for (const auto& e : tracker.interferers_now(n)) {
      CHECK(e.is_virtual());
      total += e.key;
    }
    CHECK(total == 0.0);
  }
}
