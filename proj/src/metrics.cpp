#include "marlpc/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace marlpc {

double power_dbm_floor(double power_mw) {
  if (power_mw <= 1e-20) return -200.0;
  return std::max(-200.0, 10.0 * std::log10(power_mw));
}

TrainMetricsWriter::TrainMetricsWriter(std::ostream& out) : out_(out) {
  out_ << "slot,link,power_dBm,rate_bpsHz,reward,epsilon,episode\n";
}

void TrainMetricsWriter::row(long slot, int link, double power_mw, double rate_bps_hz,
                             double reward, double epsilon, int episode) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%ld,%d,%.9g,%.9g,%.9g,%.9g,%d\n", slot, link,
                power_dbm_floor(power_mw), rate_bps_hz, reward, epsilon, episode);
  out_ << buf;
}

SlotMetricsWriter::SlotMetricsWriter(std::ostream& out) : out_(out) {
  out_ << "slot,link,power_dBm,rate_bpsHz,reward\n";
}

void SlotMetricsWriter::row(long slot, int link, double power_mw, double rate_bps_hz,
                            double reward) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%ld,%d,%.9g,%.9g,%.9g\n", slot, link,
                power_dbm_floor(power_mw), rate_bps_hz, reward);
  out_ << buf;
}

TrajectoryWriter::TrajectoryWriter(std::ostream& out) : out_(out) {
  out_ << "slot,device,x_m,y_m,cell\n";
}

void TrajectoryWriter::row(long slot, int device, double x_m, double y_m, int cell) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%ld,%d,%.9g,%.9g,%d\n", slot, device, x_m, y_m, cell);
  out_ << buf;
}

}  // namespace marlpc
