#pragma once

#include "gscout/layout.hpp"
#include "gscout/random.hpp"
#include "gscout/worldsim.hpp"

#include <vector>

namespace gscout::yieldcount {

using spatial::Vec3;
using worldsim::GreenhouseLayout;
using worldsim::RowLayout;

struct CountingParams {
  double eps = 0.04;              // m, max reachability distance
  int base_min_detections = 2;
  int augment_target = 500;
  double noise_sigma = 0.01;      // m, augmentation noise
  int expected_yield_upper = 10;  // fruit per plant
  int subsample_per_fruit = 8;
  double confidence_min = 0.5;    // detections below are discarded
};

/// Assigns each detection at or above the confidence cutoff to the row whose
/// plant-volume hull (inflated by eps) contains it; detections outside every
/// row are dropped.
std::vector<std::vector<Vec3>> split_by_row(
    const std::vector<worldsim::DetectionRecord>& dets,
    const GreenhouseLayout& layout, const CountingParams& params);

/// Uniform subset of size min(n, subsample_per_fruit * expected_fruit_upper),
/// input order preserved.
std::vector<Vec3> subsample(const std::vector<Vec3>& dets,
                            const CountingParams& params,
                            int expected_fruit_upper, random::Rng& rng);

struct AugmentedSet {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> synthetic;  // 0 = original detection
  int n_init = 0;
};

/// Pads the detections to augment_target points by jittering random
/// originals with isotropic Gaussian noise truncated at four sigma.
AugmentedSet augment(const std::vector<Vec3>& dets,
                     const CountingParams& params, random::Rng& rng);

/// base_min_detections * ceil(augment_target / n_init).
int effective_min_pts(int n_init, const CountingParams& params);

/// Keeps only points inside some plant bounding volume of the row and
/// recomputes n_init over the surviving originals.
AugmentedSet filter_by_layout(const AugmentedSet& set, const RowLayout& row);

struct OpticsResult {
  std::vector<int> order;            // visit order, a permutation of indices
  std::vector<double> reachability;  // per order position, +inf = undefined
  std::vector<double> core_dist;     // per order position, +inf = undefined
};

/// OPTICS ordering with eps-bounded core distances. The seed queue pops the
/// smallest (reachability, index) pair, so ties break to the lower index.
OpticsResult optics_order(const std::vector<Vec3>& points, double eps,
                          int min_pts);

struct Cluster {
  Vec3 center = Vec3::Zero();        // mean of the members
  std::vector<int> members;
};

struct ClusterResult {
  std::vector<Cluster> clusters;
  std::vector<int> undefined;
};

/// DBSCAN-equivalent extraction at eps on the reachability plot. Border
/// points are then reassigned to their nearest core point (ties to the lower
/// core index) so the partition matches a canonical DBSCAN run exactly.
ClusterResult extract_clusters(const std::vector<Vec3>& points,
                               const OpticsResult& optics, double eps);

struct RowCount {
  int count = 0;
  std::vector<Vec3> centers;
  int n_init = 0;
  int min_pts = 0;
  int undefined = 0;
};

/// Full per-row chain: subsample, augment, layout filter, OPTICS, extraction.
RowCount count_row(const std::vector<Vec3>& dets, const RowLayout& row,
                   const CountingParams& params, random::Rng& rng);

}  // namespace gscout::yieldcount
