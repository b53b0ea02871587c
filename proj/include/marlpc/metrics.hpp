#pragma once

#include <ostream>
#include <string>

namespace marlpc {

double power_dbm_floor(double power_mw);  // 10 log10, floored at -200 dBm for CSV output

// Fixed-format CSV sinks; identical inputs produce byte-identical files.
class TrainMetricsWriter {
 public:
  explicit TrainMetricsWriter(std::ostream& out);
  void row(long slot, int link, double power_mw, double rate_bps_hz, double reward, double epsilon,
           int episode);

 private:
  std::ostream& out_;
};

class SlotMetricsWriter {
 public:
  explicit SlotMetricsWriter(std::ostream& out);
  void row(long slot, int link, double power_mw, double rate_bps_hz, double reward);

 private:
  std::ostream& out_;
};

class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out);
  void row(long slot, int device, double x_m, double y_m, int cell);

 private:
  std::ostream& out_;
};

}  // namespace marlpc
