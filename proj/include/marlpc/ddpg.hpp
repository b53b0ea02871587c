#pragma once

#include <Eigen/Dense>
#include <deque>
#include <span>
#include <vector>

#include "marlpc/mlp.hpp"
#include "marlpc/rng.hpp"

namespace marlpc {

struct Experience {
  int agent = 0;
  long slot = 0;  // slot of next_state, i.e. when the experience was completed
  Eigen::VectorXd state;
  double action = 0;
  double reward = 0;
  Eigen::VectorXd next_state;
};

// Bounded FIFO store; sampling is uniform with replacement.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Experience e);
  std::vector<const Experience*> sample(int batch_size, RngStream& rng) const;
  void clear() { buffer_.clear(); }
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Experience& at(std::size_t i) const { return buffer_[i]; }

 private:
  std::size_t capacity_;
  std::deque<Experience> buffer_;
};

struct LearnerConfig {
  int state_dim = 0;
  std::vector<int> actor_hidden{200, 100, 40};
  std::vector<int> critic_hidden{400, 300};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double discount = 0.5;
  int target_sync_period = 100;   // critic gradient steps between hard copies
  bool use_target_actor = false;  // the Bellman target uses the live actor by default
};

// Deterministic-policy actor-critic pair. The critic takes [state; action]
// stacked at its input; the actor squashes to a single [0, 1] output port.
class DdpgLearner {
 public:
  DdpgLearner(const LearnerConfig& config, RngStream& init_rng);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& critic_target() const { return critic_target_; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }

  double q_value(const Eigen::VectorXd& state, double action) const;
  double bellman_target(double reward, const Eigen::VectorXd& next_state) const;

  // One descent step on the mean squared Bellman error; returns the pre-step
  // loss. Targets are constants (no gradient through the target net or actor).
  double critic_step(std::span<const Experience* const> minibatch);

  // One ascent step on mean Q(s, mu(s)) with the critic frozen; returns the
  // pre-step objective.
  double actor_step(std::span<const Experience* const> minibatch);

  void sync_target();
  long gradient_steps() const { return critic_steps_; }
  const LearnerConfig& config() const { return config_; }

 private:
  LearnerConfig config_;
  Mlp actor_, critic_, critic_target_, actor_target_;
  AdamState actor_opt_, critic_opt_;
  long critic_steps_ = 0;
};

// Behavior policy: with probability epsilon a uniform action in [0, 1),
// otherwise the deterministic actor output.
double epsilon_greedy_action(const Mlp& actor, const Eigen::VectorXd& state, double epsilon,
                             RngStream& rng);

}  // namespace marlpc
