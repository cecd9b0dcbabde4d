#include "gscout/layout.hpp"

#include <stdexcept>

namespace gscout::worldsim {

int GreenhouseLayout::total_plants() const {
  int n = 0;
  for (const auto& r : rows) n += static_cast<int>(r.plant_centers.size());
  return n;
}

const RowLayout& GreenhouseLayout::row(int id) const {
  for (const auto& r : rows)
    if (r.id == id) return r;
  throw std::out_of_range("GreenhouseLayout: no row with id " + std::to_string(id));
}

GreenhouseLayout GreenhouseLayout::make(const LayoutParams& p) {
  GreenhouseLayout g;
  const double y0 = -0.5 * (p.rows_per_column - 1) * p.row_pitch;
  int id = 0;
  for (int col = 0; col < p.columns; ++col) {
    const double sign = (col == 0) ? -1.0 : 1.0;
    const double cx = sign * p.column_offset;
    for (int ri = 0; ri < p.rows_per_column; ++ri) {
      RowLayout row;
      row.id = id++;
      const double cy = y0 + ri * p.row_pitch;
      row.table = Aabb::from_center(
          {cx, cy, 0.5 * p.table_height},
          {p.table_length, p.table_width, p.table_height});
      row.axis = Vec3::UnitX();
      row.normal = Vec3::UnitY();
      row.outer_sign = sign;

      const double x_start = cx - 0.5 * (p.plants_per_row - 1) * p.plant_spacing;
      for (int k = 0; k < p.plants_per_row; ++k) {
        const double px = x_start + k * p.plant_spacing;
        const Vec3 pot_center{px, cy, p.table_height + 0.5 * p.pot_size.z()};
        row.pots.push_back(Aabb::from_center(pot_center, p.pot_size));
        const double plant_z0 = p.table_height + p.pot_size.z();
        const Vec3 plant_center{px, cy, plant_z0 + 0.5 * p.plant_box_size.z()};
        row.plant_centers.push_back(plant_center);
        row.plant_volumes.push_back(Aabb::from_center(plant_center, p.plant_box_size));
      }
      g.rows.push_back(std::move(row));
    }
  }

  g.workstation = Aabb::from_center(
      {0.0, 0.0, 0.5 * p.workstation_size.z()}, p.workstation_size);

  Vec3 lo{1e30, 1e30, 0.0}, hi{-1e30, -1e30, p.bounds_height};
  for (const auto& r : g.rows) {
    lo.head<2>() = lo.head<2>().cwiseMin(r.table.lo.head<2>());
    hi.head<2>() = hi.head<2>().cwiseMax(r.table.hi.head<2>());
  }
  lo.head<2>().array() -= p.bounds_margin;
  hi.head<2>().array() += p.bounds_margin;
  g.bounds = {lo, hi};
  return g;
}

double obstacle_clearance(const Vec3& p, const GreenhouseLayout& layout) {
  double d = layout.workstation.distance(p);
  for (const auto& r : layout.rows) {
    d = std::min(d, r.table.distance(p));
    for (const auto& b : r.plant_volumes) d = std::min(d, b.distance(p));
    for (const auto& b : r.pots) d = std::min(d, b.distance(p));
  }
  return d;
}

}  // namespace gscout::worldsim
