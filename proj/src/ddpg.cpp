#include "marlpc/ddpg.hpp"

#include <stdexcept>

namespace marlpc {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be positive");
}

void ReplayMemory::push(Experience e) {
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.push_back(std::move(e));
}

std::vector<const Experience*> ReplayMemory::sample(int batch_size, RngStream& rng) const {
  if (buffer_.empty()) throw std::logic_error("ReplayMemory::sample: buffer is empty");
  std::vector<const Experience*> batch(batch_size);
  for (int i = 0; i < batch_size; ++i)
    batch[i] = &buffer_[rng.integer(buffer_.size())];
  return batch;
}

namespace {

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims;
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

DdpgLearner::DdpgLearner(const LearnerConfig& config, RngStream& init_rng) : config_(config) {
  if (config.state_dim <= 0) throw std::invalid_argument("DdpgLearner: state_dim must be positive");
  actor_ = make_mlp(with_io(config.state_dim, config.actor_hidden, 1), Activation::Relu,
                    Activation::Sigmoid, init_rng);
  critic_ = make_mlp(with_io(config.state_dim + 1, config.critic_hidden, 1), Activation::Relu,
                     Activation::Identity, init_rng);
  critic_target_ = critic_;
  actor_target_ = actor_;
}

double DdpgLearner::q_value(const Eigen::VectorXd& state, double action) const {
  Eigen::VectorXd x(state.size() + 1);
  x << state, action;
  return critic_.forward1(x)(0);
}

double DdpgLearner::bellman_target(double reward, const Eigen::VectorXd& next_state) const {
  const Mlp& policy = config_.use_target_actor ? actor_target_ : actor_;
  Eigen::VectorXd x(next_state.size() + 1);
  x << next_state, policy.forward1(next_state)(0);
  return reward + config_.discount * critic_target_.forward1(x)(0);
}

double DdpgLearner::critic_step(std::span<const Experience* const> minibatch) {
  const int batch = static_cast<int>(minibatch.size());
  if (batch == 0) throw std::invalid_argument("critic_step: empty minibatch");
  const int sdim = config_.state_dim;

  Eigen::MatrixXd x(sdim + 1, batch), x2(sdim + 1, batch);
  Eigen::RowVectorXd rewards(batch);
  for (int i = 0; i < batch; ++i) {
    const Experience& e = *minibatch[i];
    x.col(i).head(sdim) = e.state;
    x.col(i)(sdim) = e.action;
    x2.col(i).head(sdim) = e.next_state;
    rewards(i) = e.reward;
  }
  const Mlp& policy = config_.use_target_actor ? actor_target_ : actor_;
  x2.row(sdim) = policy.forward(x2.topRows(sdim));
  const Eigen::RowVectorXd y =
      rewards + config_.discount * critic_target_.forward(x2).row(0);

  MlpTrace trace = forward_trace(critic_, x);
  const Eigen::RowVectorXd residual = trace.acts.back().row(0) - y;
  const double loss = residual.squaredNorm() / batch;

  Eigen::MatrixXd upstream = (2.0 / batch) * residual;
  MlpGrads grads;
  backward(critic_, trace, upstream, grads);
  adam_update(critic_, grads, critic_opt_, config_.critic_lr, -1.0);

  ++critic_steps_;
  if (config_.target_sync_period > 0 && critic_steps_ % config_.target_sync_period == 0)
    sync_target();
  return loss;
}

double DdpgLearner::actor_step(std::span<const Experience* const> minibatch) {
  const int batch = static_cast<int>(minibatch.size());
  if (batch == 0) throw std::invalid_argument("actor_step: empty minibatch");
  const int sdim = config_.state_dim;

  Eigen::MatrixXd states(sdim, batch);
  for (int i = 0; i < batch; ++i) states.col(i) = minibatch[i]->state;

  MlpTrace actor_trace = forward_trace(actor_, states);
  Eigen::MatrixXd x(sdim + 1, batch);
  x.topRows(sdim) = states;
  x.row(sdim) = actor_trace.acts.back().row(0);

  MlpTrace critic_trace = forward_trace(critic_, x);
  const double objective = critic_trace.acts.back().row(0).mean();

  // dJ/d(critic input), action row only; the critic itself stays frozen
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(1, batch, 1.0 / batch);
  MlpGrads scratch;
  const Eigen::MatrixXd dx = backward(critic_, critic_trace, upstream, scratch);

  MlpGrads actor_grads;
  backward(actor_, actor_trace, dx.bottomRows(1), actor_grads);
  adam_update(actor_, actor_grads, actor_opt_, config_.actor_lr, +1.0);
  return objective;
}

void DdpgLearner::sync_target() {
  critic_target_ = critic_;
  if (config_.use_target_actor) actor_target_ = actor_;
}

double epsilon_greedy_action(const Mlp& actor, const Eigen::VectorXd& state, double epsilon,
                             RngStream& rng) {
  if (epsilon > 0 && rng.uniform() < epsilon) return rng.uniform();
  return actor.forward1(state)(0);
}

}  // namespace marlpc
