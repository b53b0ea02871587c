#include "marlpc/orchestrator.hpp"

#include <cmath>

#include "marlpc/baselines.hpp"
#include "marlpc/errors.hpp"

namespace marlpc {

namespace fs = std::filesystem;

World::World(const Config& config, std::uint64_t seed, std::uint64_t salt)
    : config_(config),
      layout_(build_layout(config.network.cells, config.network.cell_radius_m)),
      mobility_rng_(seed, Stream::Mobility, salt),
      shadowing_rng_(seed, Stream::ShadowingStep, salt),
      fading_rng_(seed, Stream::FadingStep, salt) {
  mobility_params_ = MobilityParams{config.mobility.max_speed_mps, config.mobility.speed_delta_mps,
                                    config.mobility.heading_delta_rad,
                                    config.mobility_update_period_slots(), config.slot_duration_s()};
  pathloss_ = PathLossParams{config.network.pathloss_const_db, config.network.pathloss_slope_db,
                             config.network.min_distance_km};

  RngStream placement(seed, Stream::Placement, salt);
  const double init_speed = config.mobility.enabled ? config.mobility.max_speed_mps : 0.0;
  auto [devices, associations] = init_devices(layout_, config.network.links, init_speed, placement);
  devices_ = std::move(devices);
  associations_ = std::move(associations);

  RngStream shadowing_init(seed, Stream::ShadowingInit, salt);
  shadowing_ = init_shadowing(config.network.cells, config.network.links,
                              config.network.shadowing_std_db, config.network.shadowing_corr_m,
                              shadowing_init);
  RngStream fading_init(seed, Stream::FadingInit, salt);
  fading_ = init_fading(config.network.cells, config.network.links, fading_init);
  compose();
}

void World::advance(long slot) {
  slot_ = slot;
  if (config_.mobility.enabled) {
    step_mobility(devices_, layout_, mobility_params_, slot, mobility_rng_);
    update_association(devices_, associations_, layout_, config_.timing.register_dwell_slots);
  }

  const int links = config_.network.links;
  std::vector<double> displacement(links), doppler(links);
  const double slot_s = config_.slot_duration_s();
  for (int n = 0; n < links; ++n) {
    displacement[n] = devices_[n].displacement_last_slot_m;
    doppler[n] = config_.mobility.enabled
                     ? (displacement[n] / slot_s) * config_.network.carrier_hz / kSpeedOfLightMps
                     : config_.mobility.fixed_doppler_hz;
  }
  step_shadowing(shadowing_, displacement, shadowing_rng_);
  step_fading(fading_, doppler, slot_s, fading_rng_);
  compose();
}

void World::compose() {
  gains_ = compose_gains(layout_, devices_, shadowing_, fading_, pathloss_);
  link_gains_ = link_gain_matrix(gains_, associations_);
}

std::vector<int> World::association_cells() const {
  std::vector<int> cells(associations_.size());
  for (std::size_t n = 0; n < associations_.size(); ++n) cells[n] = associations_[n].serving_cell;
  return cells;
}

std::uint64_t World::channel_draws() const {
  return shadowing_rng_.draws() + fading_rng_.draws();
}

AgentRuntime::AgentRuntime(const Config& config)
    : links_(config.network.links),
      tracker_(config.network.links, config.neighbors.eta, config.neighbors.cap),
      builder_(StateLayout{config.neighbors.cap},
               StateNormalization{config.network.pmax_dbm, config.network.noise_dbm, 10.0, 0.25},
               config.noise_mw()) {}

void AgentRuntime::reset() {
  tracker_.reset();
  history_.clear();
}

void AgentRuntime::begin_slot() {
  if (const SlotLog* p = prev()) tracker_.advance(*p);
}

Eigen::MatrixXd AgentRuntime::build_states(long slot, const Eigen::MatrixXd& current_gains) const {
  Eigen::MatrixXd states(builder_.layout().dimension(), links_);
  for (int n = 0; n < links_; ++n)
    states.col(n) = builder_.build(n, slot, current_gains, prev(), prev2(), tracker_);
  return states;
}

Eigen::VectorXd AgentRuntime::build_state(int n, long slot, const Eigen::MatrixXd& current_gains,
                                          std::vector<PortProvenance>* provenance) const {
  return builder_.build(n, slot, current_gains, prev(), prev2(), tracker_, provenance);
}

void AgentRuntime::commit(SlotLog log) {
  history_.push_back(std::move(log));
  while (history_.size() > 2) history_.pop_front();
}

double action_to_power_mw(double action, const Config& config) {
  const double a = std::clamp(action, 0.0, 1.0);
  if (config.learning.action_power_map == "log") {
    const double dbm = config.network.pmax_dbm - (1.0 - a) * config.learning.log_map_range_db;
    return std::pow(10.0, dbm / 10.0);
  }
  return a * config.pmax_mw();
}

Orchestrator::Orchestrator(const Config& config, std::uint64_t deployment_salt)
    : config_(config),
      world_(config_, config.seed, deployment_salt),
      runtime_(config_),
      replay_(static_cast<std::size_t>(config.learning.replay_capacity)),
      exploration_rng_(config.seed, Stream::Exploration, deployment_salt),
      replay_rng_(config.seed, Stream::Replay, deployment_salt) {
  LearnerConfig lc;
  lc.state_dim = config_.state_dimension();
  lc.actor_hidden = config_.learning.actor_hidden;
  lc.critic_hidden = config_.learning.critic_hidden;
  lc.actor_lr = config_.learning.actor_lr;
  lc.critic_lr = config_.learning.critic_lr;
  lc.discount = config_.learning.discount;
  lc.target_sync_period = config_.learning.target_sync_period;
  lc.use_target_actor = config_.learning.use_target_actor;
  RngStream init_rng(config_.seed, Stream::WeightInit, deployment_salt);
  learner_ = std::make_unique<DdpgLearner>(lc, init_rng);

  // the initial policy is pre-deployed: usable from slot 0 regardless of T_d
  snapshots_.push_back(PolicySnapshot{learner_->actor(), -1, 0});
  epsilon_ = config_.learning.epsilon_initial;
}

void Orchestrator::start_episode(int episode_index) {
  episode_ = episode_index;
  replay_.clear();
  runtime_.reset();
  last_scored_.valid = false;
  inbox_.valid = false;
  epsilon_ = config_.learning.epsilon_initial;
  const double lo = std::max(config_.learning.epsilon_final, 1e-6);
  const double hi = std::max(config_.learning.epsilon_initial, 1e-6);
  const int span = std::max(1, config_.timing.train_slots - 1);
  epsilon_decay_ = std::pow(lo / hi, 1.0 / span);
}

const PolicySnapshot& Orchestrator::active_snapshot(long slot) const {
  for (auto it = snapshots_.rbegin(); it != snapshots_.rend(); ++it)
    if (it->valid_from <= slot) return *it;
  return snapshots_.front();
}

void Orchestrator::issue_snapshot(long slot) {
  snapshots_.push_back(PolicySnapshot{learner_->actor(), slot, slot + config_.timing.broadcast_delay_slots});
  ++snapshots_issued_;
  while (snapshots_.size() >= 2 && snapshots_[1].valid_from <= slot) snapshots_.pop_front();
}

void Orchestrator::force_broadcast_actor(const Mlp& actor) {
  snapshots_.clear();
  snapshots_.push_back(PolicySnapshot{actor, -1, 0});
}

SlotRecord Orchestrator::run_slot(Mode mode) {
  const long t = next_slot_++;
  if (t > 0) world_.advance(t);
  const Eigen::MatrixXd& gains = world_.link_gains();
  const int links = config_.network.links;

  runtime_.begin_slot();
  Eigen::MatrixXd states = runtime_.build_states(t, gains);

  if (mode == Mode::Train) {
    // the trainer's freshest arrival at slot t is the experience completed at t-1
    if (inbox_.valid) {
      if (inbox_.completed_slot > t - 1) ++causality_violations_;
      for (Experience& e : inbox_.experiences) replay_.push(std::move(e));
      inbox_.experiences.clear();
      inbox_.valid = false;
    }
    if (last_scored_.valid) {
      inbox_.experiences.clear();
      inbox_.experiences.reserve(links);
      for (int n = 0; n < links; ++n)
        inbox_.experiences.push_back(Experience{n, t, last_scored_.states.col(n),
                                                last_scored_.actions(n), last_scored_.rewards(n),
                                                states.col(n)});
      inbox_.completed_slot = t;
      inbox_.valid = true;
    }
  }

  const PolicySnapshot& snapshot = active_snapshot(t);
  if (snapshot.valid_from > t) ++causality_violations_;
  const double epsilon = mode == Mode::Train ? epsilon_ : 0.0;

  Eigen::VectorXd actions(links), powers(links);
  for (int n = 0; n < links; ++n) {
    actions(n) = epsilon_greedy_action(snapshot.actor, states.col(n), epsilon, exploration_rng_);
    powers(n) = action_to_power_mw(actions(n), config_);
  }

  SlotLog log = make_slot_log(t, gains, powers, config_.noise_mw(), world_.association_cells());
  if (!log.rates_bps_hz.allFinite() || !powers.allFinite())
    throw NumericError("non-finite rate or power at slot " + std::to_string(t));
  const Eigen::VectorXd rewards = agent_rewards(log, config_.neighbors.eta);

  SlotRecord record;
  record.slot = t;
  record.episode = episode_;
  record.epsilon = epsilon;
  record.powers_mw = powers;
  record.rates_bps_hz = log.rates_bps_hz;
  record.rewards = rewards;

  runtime_.commit(std::move(log));
  last_scored_.valid = true;
  last_scored_.slot = t;
  last_scored_.states = std::move(states);
  last_scored_.actions = actions;
  last_scored_.rewards = rewards;

  if (mode == Mode::Train) {
    if (replay_.size() >= static_cast<std::size_t>(config_.learning.minibatch)) {
      const auto batch = replay_.sample(config_.learning.minibatch, replay_rng_);
      record.critic_loss = learner_->critic_step(batch);
      record.actor_objective = learner_->actor_step(batch);
      record.trained = true;
      if (!std::isfinite(record.critic_loss) || !std::isfinite(record.actor_objective))
        throw NumericError("non-finite training step at slot " + std::to_string(t));
    }
    if (t % config_.timing.broadcast_period_slots == 0) issue_snapshot(t);
    epsilon_ = std::max(config_.learning.epsilon_final, epsilon_ * epsilon_decay_);
  }
  return record;
}

void Orchestrator::run_travel_slot() {
  const long t = next_slot_++;
  if (t > 0) world_.advance(t);
}

RunSummary Orchestrator::run_episode_schedule(const fs::path& out_dir, TrainMetricsWriter* metrics,
                                              TrajectoryWriter* trajectory) {
  fs::create_directories(out_dir);
  RunSummary summary;
  double rate_accum = 0;
  const int links = config_.network.links;
  const int stride = config_.output.trajectory_stride_slots;

  auto trajectory_rows = [&](long slot) {
    if (!trajectory || stride <= 0 || slot % stride != 0) return;
    const auto& devices = world_.devices();
    const auto& associations = world_.associations();
    for (int n = 0; n < links; ++n)
      trajectory->row(slot, n, devices[n].position.x(), devices[n].position.y(),
                      associations[n].serving_cell);
  };

  for (int e = 1; e <= config_.timing.episodes; ++e) {
    start_episode(e);
    for (int i = 0; i < config_.timing.train_slots; ++i) {
      const SlotRecord rec = run_slot(Mode::Train);
      if (metrics)
        for (int n = 0; n < links; ++n)
          metrics->row(rec.slot, n, rec.powers_mw(n), rec.rates_bps_hz(n), rec.rewards(n),
                       rec.epsilon, e);
      trajectory_rows(rec.slot);
      rate_accum += rec.rates_bps_hz.sum();
      ++summary.scored_slots;
    }

    const fs::path ckpt = out_dir / ("policy_ep" + std::to_string(e) + ".ckpt");
    save_checkpoint(learner_->actor(), ckpt, static_cast<std::uint64_t>(next_slot_ - 1));
    summary.checkpoints.push_back(ckpt.string());

    for (int i = 0; i < config_.timing.travel_slots; ++i) {
      run_travel_slot();
      trajectory_rows(next_slot_ - 1);
    }
  }

  summary.mean_rate_per_link =
      summary.scored_slots > 0 ? rate_accum / (static_cast<double>(summary.scored_slots) * links) : 0;
  summary.causality_violations = causality_violations_;
  summary.gradient_steps = learner_->gradient_steps();
  summary.snapshots_issued = snapshots_issued_;
  return summary;
}

namespace {

struct RateAccumulator {
  double sum = 0;
  long slots = 0;
  void add(double per_slot_sum_rate, int links) {
    sum += per_slot_sum_rate / links;
    ++slots;
  }
  double mean() const { return slots > 0 ? sum / slots : 0; }
};

}  // namespace

EvalResult evaluate_policy(const Mlp* actor, const Config& config, const EvalOptions& options,
                           std::uint64_t eval_seed, SlotMetricsWriter* sink) {
  const int links = config.network.links;
  const double pmax = config.pmax_mw();
  const double noise = config.noise_mw();
  if (actor && actor->input_dim() != config.state_dimension())
    throw ConfigError("checkpoint state dimension " + std::to_string(actor->input_dim()) +
                      " does not match the configured neighbor cap (expected " +
                      std::to_string(config.state_dimension()) + ")");

  EvalResult result;
  result.deployments = options.deployments;
  result.slots = options.slots;

  RateAccumulator policy_acc, wmmse_acc, fp_acc, delayed_acc, random_acc, full_acc;
  double wmmse_iters = 0, fp_iters = 0;
  long solver_calls = 0;

  for (int d = 0; d < options.deployments; ++d) {
    World world(config, eval_seed, static_cast<std::uint64_t>(d) + 1);
    AgentRuntime runtime(config);
    DelayedFp delayed(pmax, noise, options.solver_tol, options.solver_max_iter);
    RngStream random_rng(eval_seed, Stream::BaselineRandom, static_cast<std::uint64_t>(d) + 1);

    RateAccumulator dep_policy, dep_wmmse, dep_fp, dep_delayed, dep_random, dep_full;

    for (long t = 0; t < options.slots; ++t) {
      if (t > 0) world.advance(t);
      const Eigen::MatrixXd& gains = world.link_gains();
      const std::vector<int> assoc = world.association_cells();

      if (actor) {
        runtime.begin_slot();
        const Eigen::MatrixXd states = runtime.build_states(t, gains);
        Eigen::VectorXd powers(links);
        for (int n = 0; n < links; ++n)
          powers(n) = action_to_power_mw(actor->forward1(states.col(n))(0), config);
        SlotLog log = make_slot_log(t, gains, powers, noise, assoc);
        if (!log.rates_bps_hz.allFinite())
          throw NumericError("non-finite policy rate at slot " + std::to_string(t));
        if (sink) {
          const Eigen::VectorXd rewards = agent_rewards(log, config.neighbors.eta);
          for (int n = 0; n < links; ++n)
            sink->row(t, n, powers(n), log.rates_bps_hz(n), rewards(n));
        }
        const double sum = log.rates_bps_hz.sum();
        policy_acc.add(sum, links);
        dep_policy.add(sum, links);
        runtime.commit(std::move(log));
      }

      if (options.run_baselines) {
        const AllocatorResult w = wmmse(gains, pmax, noise, options.solver_tol, options.solver_max_iter);
        const AllocatorResult f = fp(gains, pmax, noise, options.solver_tol, options.solver_max_iter);
        const Eigen::VectorXd p_delayed = delayed.next(gains);
        const Eigen::VectorXd p_random = random_power(links, pmax, random_rng);
        const Eigen::VectorXd p_full = full_power(links, pmax);

        wmmse_iters += w.iterations;
        fp_iters += f.iterations;
        ++solver_calls;

        const double sr_w = sum_rate(gains, w.powers_mw, noise);
        const double sr_f = sum_rate(gains, f.powers_mw, noise);
        const double sr_d = sum_rate(gains, p_delayed, noise);
        const double sr_r = sum_rate(gains, p_random, noise);
        const double sr_full = sum_rate(gains, p_full, noise);
        wmmse_acc.add(sr_w, links);
        fp_acc.add(sr_f, links);
        delayed_acc.add(sr_d, links);
        random_acc.add(sr_r, links);
        full_acc.add(sr_full, links);
        dep_wmmse.add(sr_w, links);
        dep_fp.add(sr_f, links);
        dep_delayed.add(sr_d, links);
        dep_random.add(sr_r, links);
        dep_full.add(sr_full, links);
      }
    }

    std::map<std::string, double> row;
    if (actor) row["policy"] = dep_policy.mean();
    if (options.run_baselines) {
      row["wmmse"] = dep_wmmse.mean();
      row["fp"] = dep_fp.mean();
      row["fp_delayed"] = dep_delayed.mean();
      row["random"] = dep_random.mean();
      row["full"] = dep_full.mean();
    }
    result.per_deployment.push_back(std::move(row));
  }

  if (actor) result.policy_rate = policy_acc.mean();
  if (options.run_baselines) {
    result.baseline_rate["wmmse"] = wmmse_acc.mean();
    result.baseline_rate["fp"] = fp_acc.mean();
    result.baseline_rate["fp_delayed"] = delayed_acc.mean();
    result.baseline_rate["random"] = random_acc.mean();
    result.baseline_rate["full"] = full_acc.mean();
    result.wmmse_mean_iterations = solver_calls > 0 ? wmmse_iters / solver_calls : 0;
    result.fp_mean_iterations = solver_calls > 0 ? fp_iters / solver_calls : 0;
  }
  return result;
}

EvalResult run_single_baseline(const std::string& algorithm, const Config& config,
                               const EvalOptions& options, std::uint64_t eval_seed,
                               SlotMetricsWriter* sink) {
  const int links = config.network.links;
  const double pmax = config.pmax_mw();
  const double noise = config.noise_mw();
  if (algorithm != "full" && algorithm != "random" && algorithm != "wmmse" && algorithm != "fp" &&
      algorithm != "fp_delayed")
    throw ConfigError("unknown baseline algorithm '" + algorithm + "'");

  EvalResult result;
  result.deployments = options.deployments;
  result.slots = options.slots;

  RateAccumulator acc;
  double iters = 0;
  long solver_calls = 0;

  for (int d = 0; d < options.deployments; ++d) {
    World world(config, eval_seed, static_cast<std::uint64_t>(d) + 1);
    DelayedFp delayed(pmax, noise, options.solver_tol, options.solver_max_iter);
    RngStream random_rng(eval_seed, Stream::BaselineRandom, static_cast<std::uint64_t>(d) + 1);
    RateAccumulator dep_acc;

    for (long t = 0; t < options.slots; ++t) {
      if (t > 0) world.advance(t);
      const Eigen::MatrixXd& gains = world.link_gains();

      Eigen::VectorXd powers;
      if (algorithm == "full") {
        powers = full_power(links, pmax);
      } else if (algorithm == "random") {
        powers = random_power(links, pmax, random_rng);
      } else if (algorithm == "fp_delayed") {
        powers = delayed.next(gains);
      } else {
        const AllocatorResult r = algorithm == "wmmse"
                                      ? wmmse(gains, pmax, noise, options.solver_tol, options.solver_max_iter)
                                      : fp(gains, pmax, noise, options.solver_tol, options.solver_max_iter);
        powers = r.powers_mw;
        iters += r.iterations;
        ++solver_calls;
      }

      const SlotLog log = make_slot_log(t, gains, powers, noise, world.association_cells());
      if (sink) {
        const Eigen::VectorXd rewards = agent_rewards(log, config.neighbors.eta);
        for (int n = 0; n < links; ++n)
          sink->row(t, n, powers(n), log.rates_bps_hz(n), rewards(n));
      }
      acc.add(log.rates_bps_hz.sum(), links);
      dep_acc.add(log.rates_bps_hz.sum(), links);
    }
    result.per_deployment.push_back({{algorithm, dep_acc.mean()}});
  }

  result.baseline_rate[algorithm] = acc.mean();
  if (algorithm == "wmmse") result.wmmse_mean_iterations = solver_calls > 0 ? iters / solver_calls : 0;
  if (algorithm == "fp") result.fp_mean_iterations = solver_calls > 0 ? iters / solver_calls : 0;
  return result;
}

}  // namespace marlpc
