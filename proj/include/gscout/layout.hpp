#pragma once

#include "gscout/spatial.hpp"

#include <vector>

namespace gscout::worldsim {

using spatial::Vec3;

/// Axis-aligned box, used for tables, pots, plant bounding volumes and the
/// workstation.
struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 size() const { return hi - lo; }
  Aabb inflated(double m) const { return {lo.array() - m, hi.array() + m}; }

  bool contains(const Vec3& p, double margin = 0.0) const {
    return (p.array() >= lo.array() - margin).all() &&
           (p.array() <= hi.array() + margin).all();
  }

  /// Euclidean distance from p to the box (0 inside).
  double distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.norm();
  }

  static Aabb from_center(const Vec3& c, const Vec3& size) {
    return {c - 0.5 * size, c + 0.5 * size};
  }
};

/// One cultivation row: a table carrying equally spaced potted plants.
/// `axis` runs along the row, `normal` points to the row's left side, and
/// `outer_sign` selects which end of the axis faces away from the central
/// aisle (where transits around the row are allowed).
struct RowLayout {
  int id = 0;
  Aabb table;
  std::vector<Vec3> plant_centers;   // centers of the plant bounding volumes
  std::vector<Aabb> plant_volumes;
  std::vector<Aabb> pots;
  Vec3 axis = Vec3::UnitX();
  Vec3 normal = Vec3::UnitY();
  double outer_sign = 1.0;
};

struct LayoutParams {
  int columns = 2;
  int rows_per_column = 4;
  int plants_per_row = 4;
  double table_length = 2.0;
  double table_width = 0.8;
  double table_height = 0.8;
  double column_offset = 3.0;  // |x| of each table center
  double row_pitch = 3.0;      // y spacing between rows
  double plant_spacing = 0.5;
  Vec3 plant_box_size{0.4, 0.4, 0.6};
  Vec3 pot_size{0.24, 0.24, 0.15};
  Vec3 workstation_size{0.8, 0.8, 0.9};
  double bounds_margin = 2.0;
  double bounds_height = 3.0;
};

struct GreenhouseLayout {
  std::vector<RowLayout> rows;
  Aabb workstation;
  Aabb bounds;

  int total_plants() const;
  const RowLayout& row(int id) const;

  /// Two table columns flanking a central workstation aisle.
  static GreenhouseLayout make(const LayoutParams& p = {});
};

/// Distance from p to the nearest obstacle volume (tables, pots, plant
/// volumes, workstation).
double obstacle_clearance(const Vec3& p, const GreenhouseLayout& layout);

}  // namespace gscout::worldsim
