#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "marlpc/rng.hpp"

namespace marlpc {

using Vec2 = Eigen::Vector2d;

struct Bounds {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool contains(const Vec2& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
};

// Hexagonal multi-cell layout. Cells are the Voronoi regions of a triangular
// lattice with spacing sqrt(3) * cell_radius_m (cell_radius_m = center-to-vertex).
// Cell 0 sits at the origin; further cells follow in concentric rings,
// counter-clockwise from the +x axis.
struct CellLayout {
  int cells = 0;
  double cell_radius_m = 0;
  std::vector<Vec2> centers;
  Bounds bounds;  // bounding box of the union of hexagons

  double neighbor_spacing_m() const;
  int nearest_cell(const Vec2& p) const;
  // |p - center| projected on the three lattice axes, all below spacing/2.
  bool inside_hexagon(int cell, const Vec2& p, double shrink = 0.0) const;
};

CellLayout build_layout(int cells, double cell_radius_m);

struct DeviceKinematics {
  Vec2 position{0, 0};
  double speed_mps = 0;
  double heading_rad = 0;
  double displacement_last_slot_m = 0;
};

struct Association {
  int serving_cell = 0;
  int dwell_slots = 0;  // consecutive slots spent outside the serving cell
};

struct MobilityParams {
  double max_speed_mps = 2.5;
  double speed_delta_mps = 0.5;     // per-update uniform half-range
  double heading_delta_rad = 0.175;
  int update_period_slots = 50;     // ceil(1 s / slot duration)
  double slot_duration_s = 0.02;
};

// Uniform placement over the union of hexagons; initial speed U[0, max_speed],
// heading U[0, 2pi). Serving cell is the containing (nearest-center) cell.
std::pair<std::vector<DeviceKinematics>, std::vector<Association>> init_devices(
    const CellLayout& layout, int links, double max_speed_mps, RngStream& rng);

// One slot of Haas-style random-walk motion: on cadence slots the speed and
// heading take uniform increments (speed clamped to [0, max], heading wrapped),
// then every device moves speed * T along its heading, reflecting at the
// deployment bounding box.
void step_mobility(std::span<DeviceKinematics> devices, const CellLayout& layout,
                   const MobilityParams& params, long slot, RngStream& rng);

// Dwell rule: the serving cell changes only after register_dwell_slots
// consecutive slots spent outside it; returning home resets the counter.
void update_association(std::span<const DeviceKinematics> devices,
                        std::span<Association> associations, const CellLayout& layout,
                        int register_dwell_slots);

}  // namespace marlpc
