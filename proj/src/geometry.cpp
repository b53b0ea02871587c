#include "marlpc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace marlpc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

double wrap_2pi(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  return a;
}

}  // namespace

double CellLayout::neighbor_spacing_m() const { return kSqrt3 * cell_radius_m; }

int CellLayout::nearest_cell(const Vec2& p) const {
  int best = 0;
  double best_d2 = (p - centers[0]).squaredNorm();
  for (int k = 1; k < cells; ++k) {
    const double d2 = (p - centers[k]).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  return best;
}

bool CellLayout::inside_hexagon(int cell, const Vec2& p, double shrink) const {
  const Vec2 d = p - centers[cell];
  const double half = neighbor_spacing_m() / 2.0 - shrink;
  // lattice axes at 0, 60, 120 degrees
  const double a0 = std::abs(d.x());
  const double a1 = std::abs(0.5 * d.x() + kSqrt3 / 2.0 * d.y());
  const double a2 = std::abs(-0.5 * d.x() + kSqrt3 / 2.0 * d.y());
  return a0 < half && a1 < half && a2 < half;
}

CellLayout build_layout(int cells, double cell_radius_m) {
  if (cells < 1) throw std::invalid_argument("build_layout: cell count must be >= 1");
  if (!(cell_radius_m > 0)) throw std::invalid_argument("build_layout: cell radius must be positive");

  const double spacing = kSqrt3 * cell_radius_m;
  int rings = 0;
  for (int covered = 1; covered < cells; covered += 6 * ++rings) {
  }

  struct Candidate {
    int ring;
    double angle;
    Vec2 pos;
  };
  std::vector<Candidate> candidates;
  for (int q = -rings; q <= rings; ++q) {
    for (int r = -rings; r <= rings; ++r) {
      const int ring = (std::abs(q) + std::abs(r) + std::abs(q + r)) / 2;
      if (ring > rings) continue;
      const Vec2 pos(spacing * (q + 0.5 * r), spacing * (kSqrt3 / 2.0 * r));
      double angle = ring == 0 ? 0.0 : std::atan2(pos.y(), pos.x());
      if (angle < -1e-12) angle += 2 * kPi;
      candidates.push_back({ring, angle, pos});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.ring != b.ring) return a.ring < b.ring;
    return a.angle < b.angle;
  });

  CellLayout layout;
  layout.cells = cells;
  layout.cell_radius_m = cell_radius_m;
  layout.centers.reserve(cells);
  for (int i = 0; i < cells; ++i) layout.centers.push_back(candidates[i].pos);

  // bounding box of the union of hexagons (pointy-top: x-extent sqrt(3)/2 * R, y-extent R)
  const double ex = kSqrt3 / 2.0 * cell_radius_m;
  const double ey = cell_radius_m;
  Bounds b{layout.centers[0].x(), layout.centers[0].x(), layout.centers[0].y(), layout.centers[0].y()};
  for (const Vec2& c : layout.centers) {
    b.xmin = std::min(b.xmin, c.x() - ex);
    b.xmax = std::max(b.xmax, c.x() + ex);
    b.ymin = std::min(b.ymin, c.y() - ey);
    b.ymax = std::max(b.ymax, c.y() + ey);
  }
  layout.bounds = b;
  return layout;
}

std::pair<std::vector<DeviceKinematics>, std::vector<Association>> init_devices(
    const CellLayout& layout, int links, double max_speed_mps, RngStream& rng) {
  if (links < 1) throw std::invalid_argument("init_devices: link count must be >= 1");

  std::vector<DeviceKinematics> devices(links);
  std::vector<Association> associations(links);
  const double ex = kSqrt3 / 2.0 * layout.cell_radius_m;
  const double ey = layout.cell_radius_m;

  for (int n = 0; n < links; ++n) {
    const int cell = static_cast<int>(rng.integer(static_cast<std::uint64_t>(layout.cells)));
    const Vec2 c = layout.centers[cell];
    Vec2 p;
    do {
      p = Vec2(rng.uniform(c.x() - ex, c.x() + ex), rng.uniform(c.y() - ey, c.y() + ey));
    } while (!layout.inside_hexagon(cell, p, 1e-9 * layout.cell_radius_m));
    devices[n].position = p;
    devices[n].speed_mps = rng.uniform(0.0, max_speed_mps);
    devices[n].heading_rad = rng.uniform(0.0, 2 * kPi);
    devices[n].displacement_last_slot_m = 0.0;
    associations[n] = Association{cell, 0};
  }
  return {std::move(devices), std::move(associations)};
}

void step_mobility(std::span<DeviceKinematics> devices, const CellLayout& layout,
                   const MobilityParams& params, long slot, RngStream& rng) {
  const bool cadence = params.update_period_slots > 0 && slot % params.update_period_slots == 0;
  const Bounds& b = layout.bounds;

  for (DeviceKinematics& dev : devices) {
    if (cadence) {
      dev.speed_mps = std::clamp(
          dev.speed_mps + rng.uniform(-params.speed_delta_mps, params.speed_delta_mps), 0.0,
          params.max_speed_mps);
      dev.heading_rad =
          wrap_2pi(dev.heading_rad + rng.uniform(-params.heading_delta_rad, params.heading_delta_rad));
    }

    const Vec2 old = dev.position;
    const double step = dev.speed_mps * params.slot_duration_s;
    Vec2 p = old + step * Vec2(std::cos(dev.heading_rad), std::sin(dev.heading_rad));

    double heading = dev.heading_rad;
    for (int guard = 0; guard < 8 && !b.contains(p); ++guard) {
      if (p.x() < b.xmin) {
        p.x() = 2 * b.xmin - p.x();
        heading = kPi - heading;
      } else if (p.x() > b.xmax) {
        p.x() = 2 * b.xmax - p.x();
        heading = kPi - heading;
      }
      if (p.y() < b.ymin) {
        p.y() = 2 * b.ymin - p.y();
        heading = -heading;
      } else if (p.y() > b.ymax) {
        p.y() = 2 * b.ymax - p.y();
        heading = -heading;
      }
    }
    dev.heading_rad = wrap_2pi(heading);
    dev.position = p;
    dev.displacement_last_slot_m = (p - old).norm();
  }
}

void update_association(std::span<const DeviceKinematics> devices,
                        std::span<Association> associations, const CellLayout& layout,
                        int register_dwell_slots) {
  for (std::size_t n = 0; n < devices.size(); ++n) {
    const int containing = layout.nearest_cell(devices[n].position);
    Association& a = associations[n];
    if (containing == a.serving_cell) {
      a.dwell_slots = 0;
    } else if (++a.dwell_slots >= register_dwell_slots) {
      a.serving_cell = containing;
      a.dwell_slots = 0;
    }
  }
}

}  // namespace marlpc
