#include "marlpc/config.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "marlpc/errors.hpp"

namespace marlpc {

using nlohmann::json;

namespace {

// Walks one config section, rejecting unknown keys and recording defaults.
class SectionReader {
 public:
  SectionReader(const json& parent, std::string name, std::vector<std::string>* defaulted)
      : name_(std::move(name)), defaulted_(defaulted) {
    if (parent.contains(name_)) {
      if (!parent.at(name_).is_object())
        throw ConfigError("config field '" + name_ + "' must be an object");
      section_ = &parent.at(name_);
    }
  }

  template <typename T>
  void read(const char* key, T& value) {
    seen_.push_back(key);
    if (!section_ || !section_->contains(key)) {
      if (defaulted_) defaulted_->push_back(name_ + "." + key);
      return;
    }
    try {
      value = section_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config field '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void finish() const {
    if (!section_) return;
    for (const auto& [key, _] : section_->items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw ConfigError("unknown config field '" + name_ + "." + key + "'");
    }
  }

 private:
  std::string name_;
  const json* section_ = nullptr;
  std::vector<std::string>* defaulted_;
  std::vector<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

double Config::pmax_mw() const { return std::pow(10.0, network.pmax_dbm / 10.0); }
double Config::noise_mw() const { return std::pow(10.0, network.noise_dbm / 10.0); }

int Config::mobility_update_period_slots() const {
  return static_cast<int>(std::ceil(mobility.update_period_s / slot_duration_s()));
}

Config config_from_json(const json& j, std::vector<std::string>* defaulted) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"network", "mobility", "neighbors", "learning",
                                  "timing",  "output",   "seed"};
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known))
      throw ConfigError("unknown config field '" + key + "'");
  }

  Config c;

  SectionReader net(j, "network", defaulted);
  net.read("cells", c.network.cells);
  net.read("links", c.network.links);
  net.read("cell_radius_m", c.network.cell_radius_m);
  net.read("pmax_dbm", c.network.pmax_dbm);
  net.read("noise_dbm", c.network.noise_dbm);
  net.read("carrier_hz", c.network.carrier_hz);
  net.read("slot_duration_ms", c.network.slot_duration_ms);
  net.read("pathloss_const_db", c.network.pathloss_const_db);
  net.read("pathloss_slope_db", c.network.pathloss_slope_db);
  net.read("min_distance_km", c.network.min_distance_km);
  net.read("shadowing_std_db", c.network.shadowing_std_db);
  net.read("shadowing_corr_m", c.network.shadowing_corr_m);
  net.finish();

  SectionReader mob(j, "mobility", defaulted);
  mob.read("enabled", c.mobility.enabled);
  mob.read("max_speed_mps", c.mobility.max_speed_mps);
  mob.read("speed_delta_mps", c.mobility.speed_delta_mps);
  mob.read("heading_delta_rad", c.mobility.heading_delta_rad);
  mob.read("update_period_s", c.mobility.update_period_s);
  mob.read("fixed_doppler_hz", c.mobility.fixed_doppler_hz);
  mob.finish();

  SectionReader nb(j, "neighbors", defaulted);
  nb.read("eta", c.neighbors.eta);
  nb.read("cap", c.neighbors.cap);
  nb.finish();

  SectionReader lrn(j, "learning", defaulted);
  lrn.read("actor_hidden", c.learning.actor_hidden);
  lrn.read("critic_hidden", c.learning.critic_hidden);
  lrn.read("actor_lr", c.learning.actor_lr);
  lrn.read("critic_lr", c.learning.critic_lr);
  lrn.read("discount", c.learning.discount);
  lrn.read("minibatch", c.learning.minibatch);
  lrn.read("replay_capacity", c.learning.replay_capacity);
  lrn.read("target_sync_period", c.learning.target_sync_period);
  lrn.read("use_target_actor", c.learning.use_target_actor);
  lrn.read("epsilon_initial", c.learning.epsilon_initial);
  lrn.read("epsilon_final", c.learning.epsilon_final);
  lrn.read("action_power_map", c.learning.action_power_map);
  lrn.read("log_map_range_db", c.learning.log_map_range_db);
  lrn.finish();

  SectionReader tim(j, "timing", defaulted);
  tim.read("episodes", c.timing.episodes);
  tim.read("train_slots", c.timing.train_slots);
  tim.read("travel_slots", c.timing.travel_slots);
  tim.read("broadcast_period_slots", c.timing.broadcast_period_slots);
  tim.read("broadcast_delay_slots", c.timing.broadcast_delay_slots);
  tim.read("register_dwell_slots", c.timing.register_dwell_slots);
  tim.finish();

  SectionReader out(j, "output", defaulted);
  out.read("trajectory_stride_slots", c.output.trajectory_stride_slots);
  out.read("state_debug", c.output.state_debug);
  out.finish();

  if (j.contains("seed")) {
    try {
      c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception&) {
      throw ConfigError("config field 'seed' has the wrong type");
    }
  } else if (defaulted) {
    defaulted->push_back("seed");
  }

  require(c.network.cells >= 1, "network.cells must be >= 1");
  require(c.network.links >= 1, "network.links must be >= 1");
  require(c.network.cell_radius_m > 0, "network.cell_radius_m must be positive");
  require(c.network.slot_duration_ms > 0, "network.slot_duration_ms must be positive");
  require(c.network.carrier_hz > 0, "network.carrier_hz must be positive");
  require(c.network.min_distance_km > 0, "network.min_distance_km must be positive");
  require(c.network.shadowing_std_db >= 0, "network.shadowing_std_db must be >= 0");
  require(c.network.shadowing_corr_m > 0, "network.shadowing_corr_m must be positive");
  require(c.mobility.max_speed_mps >= 0, "mobility.max_speed_mps must be >= 0");
  require(c.mobility.update_period_s > 0, "mobility.update_period_s must be positive");
  require(c.mobility.fixed_doppler_hz >= 0, "mobility.fixed_doppler_hz must be >= 0");
  require(c.neighbors.eta >= 0, "neighbors.eta must be >= 0");
  require(c.neighbors.cap >= 1, "neighbors.cap must be >= 1");
  require(!c.learning.actor_hidden.empty(), "learning.actor_hidden must not be empty");
  require(!c.learning.critic_hidden.empty(), "learning.critic_hidden must not be empty");
  require(c.learning.actor_lr > 0, "learning.actor_lr must be positive");
  require(c.learning.critic_lr >= 0, "learning.critic_lr must be >= 0");
  require(c.learning.discount > 0 && c.learning.discount <= 1,
          "learning.discount must lie in (0, 1]");
  require(c.learning.minibatch >= 1, "learning.minibatch must be >= 1");
  require(c.learning.replay_capacity >= 1, "learning.replay_capacity must be >= 1");
  require(c.learning.target_sync_period >= 1, "learning.target_sync_period must be >= 1");
  require(c.learning.epsilon_initial >= 0 && c.learning.epsilon_initial <= 1,
          "learning.epsilon_initial must lie in [0, 1]");
  require(c.learning.epsilon_final >= 0 && c.learning.epsilon_final <= c.learning.epsilon_initial,
          "learning.epsilon_final must lie in [0, epsilon_initial]");
  require(c.learning.action_power_map == "linear" || c.learning.action_power_map == "log",
          "learning.action_power_map must be 'linear' or 'log'");
  require(c.learning.log_map_range_db > 0, "learning.log_map_range_db must be positive");
  require(c.timing.episodes >= 1, "timing.episodes must be >= 1");
  require(c.timing.train_slots >= 1, "timing.train_slots must be >= 1");
  require(c.timing.travel_slots >= 0, "timing.travel_slots must be >= 0");
  require(c.timing.broadcast_period_slots >= 1, "timing.broadcast_period_slots must be >= 1");
  require(c.timing.broadcast_delay_slots >= 0, "timing.broadcast_delay_slots must be >= 0");
  require(c.timing.register_dwell_slots >= 1, "timing.register_dwell_slots must be >= 1");
  require(c.output.trajectory_stride_slots >= 0, "output.trajectory_stride_slots must be >= 0");

  return c;
}

Config load_config(const std::filesystem::path& path, std::vector<std::string>* defaulted) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, defaulted);
}

json config_to_json(const Config& c) {
  return json{
      {"network",
       {{"cells", c.network.cells},
        {"links", c.network.links},
        {"cell_radius_m", c.network.cell_radius_m},
        {"pmax_dbm", c.network.pmax_dbm},
        {"noise_dbm", c.network.noise_dbm},
        {"carrier_hz", c.network.carrier_hz},
        {"slot_duration_ms", c.network.slot_duration_ms},
        {"pathloss_const_db", c.network.pathloss_const_db},
        {"pathloss_slope_db", c.network.pathloss_slope_db},
        {"min_distance_km", c.network.min_distance_km},
        {"shadowing_std_db", c.network.shadowing_std_db},
        {"shadowing_corr_m", c.network.shadowing_corr_m}}},
      {"mobility",
       {{"enabled", c.mobility.enabled},
        {"max_speed_mps", c.mobility.max_speed_mps},
        {"speed_delta_mps", c.mobility.speed_delta_mps},
        {"heading_delta_rad", c.mobility.heading_delta_rad},
        {"update_period_s", c.mobility.update_period_s},
        {"fixed_doppler_hz", c.mobility.fixed_doppler_hz}}},
      {"neighbors", {{"eta", c.neighbors.eta}, {"cap", c.neighbors.cap}}},
      {"learning",
       {{"actor_hidden", c.learning.actor_hidden},
        {"critic_hidden", c.learning.critic_hidden},
        {"actor_lr", c.learning.actor_lr},
        {"critic_lr", c.learning.critic_lr},
        {"discount", c.learning.discount},
        {"minibatch", c.learning.minibatch},
        {"replay_capacity", c.learning.replay_capacity},
        {"target_sync_period", c.learning.target_sync_period},
        {"use_target_actor", c.learning.use_target_actor},
        {"epsilon_initial", c.learning.epsilon_initial},
        {"epsilon_final", c.learning.epsilon_final},
        {"action_power_map", c.learning.action_power_map},
        {"log_map_range_db", c.learning.log_map_range_db}}},
      {"timing",
       {{"episodes", c.timing.episodes},
        {"train_slots", c.timing.train_slots},
        {"travel_slots", c.timing.travel_slots},
        {"broadcast_period_slots", c.timing.broadcast_period_slots},
        {"broadcast_delay_slots", c.timing.broadcast_delay_slots},
        {"register_dwell_slots", c.timing.register_dwell_slots}}},
      {"output",
       {{"trajectory_stride_slots", c.output.trajectory_stride_slots},
        {"state_debug", c.output.state_debug}}},
      {"seed", c.seed},
  };
}

void write_manifest(const Config& config, const std::vector<std::string>& defaulted,
                    const std::filesystem::path& out_dir, const std::string& command,
                    const std::string& started_utc, const std::string& finished_utc) {
  json manifest{
      {"tool", "marlpc"},
      {"version", kVersionTag},
      {"command", command},
      {"seed", config.seed},
      {"config", config_to_json(config)},
      {"defaulted_fields", defaulted},
      {"started_utc", started_utc},
      {"finished_utc", finished_utc},
  };
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + out_dir.string());
  out << manifest.dump(2) << "\n";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace marlpc
