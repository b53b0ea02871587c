#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace marlpc {

struct NetworkConfig {
  int cells = 10;
  int links = 20;
  double cell_radius_m = 200.0;
  double pmax_dbm = 38.0;
  double noise_dbm = -114.0;
  double carrier_hz = 2.0e9;
  double slot_duration_ms = 20.0;
  double pathloss_const_db = 128.1;
  double pathloss_slope_db = 37.6;
  double min_distance_km = 0.01;
  double shadowing_std_db = 10.0;
  double shadowing_corr_m = 10.0;
};

struct MobilityConfig {
  bool enabled = true;
  double max_speed_mps = 2.5;
  double speed_delta_mps = 0.5;
  double heading_delta_rad = 0.175;
  double update_period_s = 1.0;
  double fixed_doppler_hz = 10.0;  // small-scale Doppler when mobility is off
};

struct NeighborConfig {
  double eta = 5.0;  // interference threshold in units of the noise floor
  int cap = 5;
};

struct LearningConfig {
  std::vector<int> actor_hidden{200, 100, 40};
  std::vector<int> critic_hidden{400, 300};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double discount = 0.5;
  int minibatch = 128;
  int replay_capacity = 10000;
  int target_sync_period = 100;
  bool use_target_actor = false;
  double epsilon_initial = 0.3;
  double epsilon_final = 0.01;
  std::string action_power_map = "linear";  // or "log"
  double log_map_range_db = 60.0;
};

struct TimingConfig {
  int episodes = 10;
  int train_slots = 5000;
  int travel_slots = 50000;
  int broadcast_period_slots = 50;  // T_u
  int broadcast_delay_slots = 2;    // T_d
  int register_dwell_slots = 10;    // T_register
};

struct OutputConfig {
  int trajectory_stride_slots = 100;  // 0 disables the trajectory dump
  bool state_debug = false;
};

struct Config {
  NetworkConfig network;
  MobilityConfig mobility;
  NeighborConfig neighbors;
  LearningConfig learning;
  TimingConfig timing;
  OutputConfig output;
  std::uint64_t seed = 1;

  double pmax_mw() const;
  double noise_mw() const;
  double slot_duration_s() const { return network.slot_duration_ms / 1000.0; }
  int mobility_update_period_slots() const;
  int state_dimension() const { return 6 + 10 * neighbors.cap; }
};

// Strict parse: unknown fields are errors naming the offending key, out-of-range
// values are errors, and every absent known field is recorded in `defaulted`.
Config config_from_json(const nlohmann::json& j, std::vector<std::string>* defaulted = nullptr);
Config load_config(const std::filesystem::path& path, std::vector<std::string>* defaulted = nullptr);
nlohmann::json config_to_json(const Config& config);

// Full config echo plus seed, version tag, defaulted-field list and timestamps.
void write_manifest(const Config& config, const std::vector<std::string>& defaulted,
                    const std::filesystem::path& out_dir, const std::string& command,
                    const std::string& started_utc, const std::string& finished_utc);

std::string utc_timestamp();

inline constexpr const char* kVersionTag = "0.1.0";

}  // namespace marlpc
