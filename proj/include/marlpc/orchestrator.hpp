#pragma once

#include <Eigen/Dense>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "marlpc/agent_state.hpp"
#include "marlpc/channel.hpp"
#include "marlpc/config.hpp"
#include "marlpc/ddpg.hpp"
#include "marlpc/geometry.hpp"
#include "marlpc/metrics.hpp"
#include "marlpc/netsim.hpp"

namespace marlpc {

// One deployment's physical state: layout, device kinematics, associations and
// channel fields, advanced one slot at a time. The channel evolution is
// exogenous (powers never feed back into it), which is what makes paired
// policy/baseline comparisons on identical realizations possible.
class World {
 public:
  World(const Config& config, std::uint64_t seed, std::uint64_t salt = 0);

  void advance(long slot);
  long slot() const { return slot_; }

  const CellLayout& layout() const { return layout_; }
  const std::vector<DeviceKinematics>& devices() const { return devices_; }
  const std::vector<Association>& associations() const { return associations_; }
  std::vector<int> association_cells() const;
  const Eigen::MatrixXd& link_gains() const { return link_gains_; }
  const GainMatrix& gains() const { return gains_; }

  std::uint64_t channel_draws() const;  // engine draws consumed by shadowing + fading

 private:
  void compose();

  const Config& config_;
  CellLayout layout_;
  MobilityParams mobility_params_;
  PathLossParams pathloss_;
  std::vector<DeviceKinematics> devices_;
  std::vector<Association> associations_;
  ShadowingField shadowing_;
  FadingField fading_;
  GainMatrix gains_;
  Eigen::MatrixXd link_gains_;
  RngStream mobility_rng_, shadowing_rng_, fading_rng_;
  long slot_ = 0;
};

// The agent-visible side of a rollout: neighbor tracking, bounded slot history
// and observation building. Shared by training and evaluation.
class AgentRuntime {
 public:
  AgentRuntime(const Config& config);

  void reset();
  // Advances neighbor sets from the previous slot's log; then states can be built.
  void begin_slot();
  Eigen::MatrixXd build_states(long slot, const Eigen::MatrixXd& current_gains) const;
  Eigen::VectorXd build_state(int n, long slot, const Eigen::MatrixXd& current_gains,
                              std::vector<PortProvenance>* provenance = nullptr) const;
  void commit(SlotLog log);

  const SlotLog* prev() const { return history_.empty() ? nullptr : &history_.back(); }
  const SlotLog* prev2() const {
    return history_.size() < 2 ? nullptr : &history_[history_.size() - 2];
  }
  const NeighborTracker& tracker() const { return tracker_; }
  const StateBuilder& state_builder() const { return builder_; }

 private:
  int links_;
  NeighborTracker tracker_;
  StateBuilder builder_;
  std::deque<SlotLog> history_;
};

double action_to_power_mw(double action, const Config& config);

struct PolicySnapshot {
  Mlp actor;
  long issued_slot = 0;
  long valid_from = 0;
};

struct SlotRecord {
  long slot = 0;
  int episode = 0;
  double epsilon = 0;
  Eigen::VectorXd powers_mw;
  Eigen::VectorXd rates_bps_hz;
  Eigen::VectorXd rewards;
  double critic_loss = 0;
  double actor_objective = 0;
  bool trained = false;
};

enum class Mode { Train, Eval };

struct RunSummary {
  long scored_slots = 0;
  double mean_rate_per_link = 0;
  long causality_violations = 0;
  long gradient_steps = 0;
  int snapshots_issued = 0;
  std::vector<std::string> checkpoints;
};

// The per-slot event loop: world advance, neighbor/state construction, delayed
// experience shipping, action selection on the delayed policy broadcast, one
// centralized gradient step, periodic snapshot issue. Travel slots advance the
// world only.
class Orchestrator {
 public:
  Orchestrator(const Config& config, std::uint64_t deployment_salt = 0);

  void start_episode(int episode_index);
  SlotRecord run_slot(Mode mode);
  void run_travel_slot();

  RunSummary run_episode_schedule(const std::filesystem::path& out_dir,
                                  TrainMetricsWriter* metrics = nullptr,
                                  TrajectoryWriter* trajectory = nullptr);

  World& world() { return world_; }
  const DdpgLearner& learner() const { return *learner_; }
  DdpgLearner& learner() { return *learner_; }
  const ReplayMemory& replay() const { return replay_; }
  AgentRuntime& runtime() { return runtime_; }
  long causality_violations() const { return causality_violations_; }
  int snapshots_issued() const { return snapshots_issued_; }
  long next_slot() const { return next_slot_; }
  double current_epsilon() const { return epsilon_; }
  const PolicySnapshot& active_snapshot(long slot) const;

  // Test hook: replace the agents' policy everywhere (learner actor untouched).
  void force_broadcast_actor(const Mlp& actor);

 private:
  void issue_snapshot(long slot);

  Config config_;
  World world_;
  AgentRuntime runtime_;
  std::unique_ptr<DdpgLearner> learner_;
  ReplayMemory replay_;
  RngStream exploration_rng_, replay_rng_;
  std::deque<PolicySnapshot> snapshots_;

  int episode_ = 0;
  long next_slot_ = 0;
  double epsilon_ = 0;
  double epsilon_decay_ = 1.0;

  struct ScoredSlot {
    bool valid = false;
    long slot = 0;
    Eigen::MatrixXd states;
    Eigen::VectorXd actions;
    Eigen::VectorXd rewards;
  };
  ScoredSlot last_scored_;
  struct Mailbox {
    bool valid = false;
    long completed_slot = 0;
    std::vector<Experience> experiences;
  };
  Mailbox inbox_;

  long causality_violations_ = 0;
  int snapshots_issued_ = 0;
};

struct EvalOptions {
  int deployments = 5;
  int slots = 500;
  bool run_baselines = true;
  double solver_tol = 1e-4;
  int solver_max_iter = 500;
};

struct EvalResult {
  int deployments = 0;
  int slots = 0;
  // mean spectral efficiency per link (bps/Hz), averaged over slots x links x deployments
  std::optional<double> policy_rate;
  std::map<std::string, double> baseline_rate;  // wmmse, fp, fp_delayed, random, full
  double wmmse_mean_iterations = 0;
  double fp_mean_iterations = 0;
  std::vector<std::map<std::string, double>> per_deployment;  // same keys plus "policy"
};

// Paired evaluation on identical channel realizations: the policy (if given)
// rolls out with epsilon = 0 while each baseline solves the same gain
// matrices. `sink` receives per-slot rows of the policy rollout.
EvalResult evaluate_policy(const Mlp* actor, const Config& config, const EvalOptions& options,
                           std::uint64_t eval_seed, SlotMetricsWriter* sink = nullptr);

// Single-allocator rollout for the baseline command; returns the eval result
// restricted to that allocator and streams its per-slot metrics.
EvalResult run_single_baseline(const std::string& algorithm, const Config& config,
                               const EvalOptions& options, std::uint64_t eval_seed,
                               SlotMetricsWriter* sink = nullptr);

}  // namespace marlpc
