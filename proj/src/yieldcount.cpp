#include "gscout/yieldcount.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace gscout::yieldcount {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

worldsim::Aabb row_hull(const RowLayout& row) {
  worldsim::Aabb hull = row.plant_volumes.front();
  for (const auto& v : row.plant_volumes) {
    hull.lo = hull.lo.cwiseMin(v.lo);
    hull.hi = hull.hi.cwiseMax(v.hi);
  }
  return hull;
}

}  // namespace

std::vector<std::vector<Vec3>> split_by_row(
    const std::vector<worldsim::DetectionRecord>& dets,
    const GreenhouseLayout& layout, const CountingParams& params) {
  std::vector<worldsim::Aabb> hulls;
  hulls.reserve(layout.rows.size());
  for (const auto& row : layout.rows) {
    hulls.push_back(row_hull(row).inflated(params.eps));
  }
  std::vector<std::vector<Vec3>> out(layout.rows.size());
  for (const auto& det : dets) {
    if (det.confidence < params.confidence_min) continue;
    for (std::size_t r = 0; r < hulls.size(); ++r) {
      if (hulls[r].contains(det.point)) {
        out[r].push_back(det.point);
        break;
      }
    }
  }
  return out;
}

std::vector<Vec3> subsample(const std::vector<Vec3>& dets,
                            const CountingParams& params,
                            int expected_fruit_upper, random::Rng& rng) {
  const int cap = params.subsample_per_fruit * expected_fruit_upper;
  const int n = int(dets.size());
  if (n <= cap) return dets;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < cap; ++i) {
    std::swap(idx[i], idx[i + rng.uniform_int(0, n - 1 - i)]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<Vec3> out;
  out.reserve(cap);
  for (const int i : idx) out.push_back(dets[i]);
  return out;
}

AugmentedSet augment(const std::vector<Vec3>& dets,
                     const CountingParams& params, random::Rng& rng) {
  const int n = int(dets.size());
  if (n < 1) throw std::invalid_argument("augment needs at least one detection");
  if (n > params.augment_target) {
    throw std::invalid_argument("more detections than the augmentation target");
  }
  AugmentedSet set;
  set.points = dets;
  set.synthetic.assign(dets.size(), 0);
  set.n_init = n;
  const double sigma = params.noise_sigma;
  const auto noise = [&]() {
    if (sigma <= 0.0) return Vec3(Vec3::Zero());
    while (true) {
      const Vec3 v(rng.gaussian(0.0, sigma), rng.gaussian(0.0, sigma),
                   rng.gaussian(0.0, sigma));
      if (v.norm() <= 4.0 * sigma) return v;
    }
  };
  for (int i = n; i < params.augment_target; ++i) {
    const int j = rng.uniform_int(0, n - 1);
    set.points.push_back(dets[j] + noise());
    set.synthetic.push_back(1);
  }
  return set;
}

int effective_min_pts(int n_init, const CountingParams& params) {
  if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
  const int factor = (params.augment_target + n_init - 1) / n_init;
  return params.base_min_detections * factor;
}

AugmentedSet filter_by_layout(const AugmentedSet& set, const RowLayout& row) {
  AugmentedSet out;
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    bool inside = false;
    for (const auto& v : row.plant_volumes) {
      if (v.contains(set.points[i])) {
        inside = true;
        break;
      }
    }
    if (!inside) continue;
    out.points.push_back(set.points[i]);
    out.synthetic.push_back(set.synthetic[i]);
    if (!set.synthetic[i]) ++out.n_init;
  }
  return out;
}

OpticsResult optics_order(const std::vector<Vec3>& points, double eps,
                          int min_pts) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
  if (min_pts < 2) throw std::invalid_argument("min_pts must be >= 2");
  const int n = int(points.size());

  // eps-neighborhoods and core distances (min_pts-th neighbor, self included)
  std::vector<std::vector<std::pair<int, double>>> nbrs(n);
  std::vector<double> core(n, kInf);
  std::vector<double> dist(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      dist[j] = (points[i] - points[j]).norm();
      if (dist[j] <= eps && j != i) nbrs[i].emplace_back(j, dist[j]);
    }
    if (min_pts <= n) {
      std::nth_element(dist.begin(), dist.begin() + (min_pts - 1), dist.end());
      if (dist[min_pts - 1] <= eps) core[i] = dist[min_pts - 1];
    }
  }

  OpticsResult res;
  res.order.reserve(n);
  res.reachability.reserve(n);
  res.core_dist.reserve(n);
  std::vector<char> processed(n, 0);
  std::vector<double> reach(n, kInf);
  std::set<std::pair<double, int>> seeds;

  const auto update_from = [&](int p) {
    if (core[p] == kInf) return;
    for (const auto& [q, d] : nbrs[p]) {
      if (processed[q]) continue;
      const double r = std::max(core[p], d);
      if (r < reach[q]) {
        seeds.erase({reach[q], q});
        reach[q] = r;
        seeds.insert({r, q});
      }
    }
  };

  for (int start = 0; start < n; ++start) {
    if (processed[start]) continue;
    processed[start] = 1;
    res.order.push_back(start);
    res.reachability.push_back(kInf);
    res.core_dist.push_back(core[start]);
    update_from(start);
    while (!seeds.empty()) {
      const auto [r, q] = *seeds.begin();
      seeds.erase(seeds.begin());
      processed[q] = 1;
      res.order.push_back(q);
      res.reachability.push_back(r);
      res.core_dist.push_back(core[q]);
      update_from(q);
    }
  }
  return res;
}

ClusterResult extract_clusters(const std::vector<Vec3>& points,
                               const OpticsResult& optics, double eps) {
  const int n = int(points.size());
  std::vector<int> label(n, -1);
  std::vector<char> is_core(n, 0);

  // cores get cluster ids along the reachability plot; a fresh cluster opens
  // wherever the plot jumps above eps onto a core point
  int current = -1;
  int next_id = 0;
  for (int k = 0; k < n; ++k) {
    const int i = optics.order[k];
    const bool core = optics.core_dist[k] <= eps;
    if (core) is_core[i] = 1;
    if (optics.reachability[k] > eps) {
      current = core ? next_id++ : -1;
    }
    if (core) label[i] = current;
  }

  // border points go to their nearest core (ties to the lower core index)
  for (int i = 0; i < n; ++i) {
    if (is_core[i]) continue;
    int best = -1;
    double best_d = eps;
    for (int j = 0; j < n; ++j) {
      if (!is_core[j]) continue;
      const double d = (points[i] - points[j]).norm();
      if (d < best_d || (d == best_d && (best == -1 || j < best))) {
        best_d = d;
        best = j;
      }
    }
    label[i] = best >= 0 ? label[best] : -1;
  }

  ClusterResult out;
  out.clusters.resize(next_id);
  for (int i = 0; i < n; ++i) {
    if (label[i] < 0) {
      out.undefined.push_back(i);
    } else {
      out.clusters[label[i]].members.push_back(i);
    }
  }
  for (auto& cluster : out.clusters) {
    Vec3 acc = Vec3::Zero();
    for (const int i : cluster.members) acc += points[i];
    if (!cluster.members.empty()) cluster.center = acc / cluster.members.size();
  }
  return out;
}

RowCount count_row(const std::vector<Vec3>& dets, const RowLayout& row,
                   const CountingParams& params, random::Rng& rng) {
  RowCount out;
  if (dets.empty()) return out;
  const int upper = params.expected_yield_upper * int(row.plant_centers.size());
  const auto sub = subsample(dets, params, upper, rng);
  const auto aug = augment(sub, params, rng);
  const auto filtered = filter_by_layout(aug, row);
  out.n_init = filtered.n_init;
  if (filtered.points.empty() || filtered.n_init == 0) return out;
  out.min_pts = effective_min_pts(filtered.n_init, params);
  const auto optics = optics_order(filtered.points, params.eps, out.min_pts);
  const auto clusters = extract_clusters(filtered.points, optics, params.eps);
  out.count = int(clusters.clusters.size());
  for (const auto& c : clusters.clusters) out.centers.push_back(c.center);
  out.undefined = int(clusters.undefined.size());
  return out;
}

}  // namespace gscout::yieldcount
