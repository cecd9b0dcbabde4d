#include "gscout/yieldcount.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace gscout;
using namespace gscout::yieldcount;
using spatial::Vec3;

namespace {

std::vector<int> labels_from(const ClusterResult& res, int n) {
  std::vector<int> label(n, -1);
  for (std::size_t c = 0; c < res.clusters.size(); ++c) {
    for (const int i : res.clusters[c].members) label[i] = int(c);
  }
  return label;
}

Vec3 truncated_noise(random::Rng& rng, double sigma) {
  while (true) {
    const Vec3 v(rng.gaussian(0, sigma), rng.gaussian(0, sigma),
                 rng.gaussian(0, sigma));
    if (v.norm() <= 4.0 * sigma) return v;
  }
}

}  // namespace

TEST_CASE("effective_min_pts: ceiling factor") {
  const CountingParams params;
  CHECK(effective_min_pts(500, params) == 2);
  CHECK(effective_min_pts(100, params) == 10);
  CHECK(effective_min_pts(3, params) == 334);
  CHECK(effective_min_pts(1, params) == 1000);
  CHECK(effective_min_pts(600, params) == 2);
  CHECK_THROWS_AS(effective_min_pts(0, params), std::invalid_argument);
}

TEST_CASE("split_by_row: containment, discard and partition") {
  const auto layout = worldsim::GreenhouseLayout::make();
  const CountingParams params;

  std::vector<worldsim::DetectionRecord> dets;
  worldsim::DetectionRecord r;
  r.point = layout.rows[0].plant_centers[1];
  dets.push_back(r);
  r.point = layout.rows[5].plant_centers[3] + Vec3(0.1, 0.05, -0.1);
  dets.push_back(r);
  r.point = layout.rows[2].plant_centers[0] + Vec3(0, 0, 1.0);  // way above
  dets.push_back(r);
  r.point = Vec3(layout.rows[3].table.center().x(),
                 layout.rows[3].table.center().y(), 0.8);  // table surface
  dets.push_back(r);

  r.point = layout.rows[0].plant_centers[2];  // in range but low confidence
  r.confidence = params.confidence_min - 0.01;
  dets.push_back(r);

  const auto split = split_by_row(dets, layout, params);
  REQUIRE(split.size() == layout.rows.size());
  CHECK(split[0].size() == 1);
  CHECK(split[5].size() == 1);
  CHECK(split[2].empty());
  CHECK(split[3].empty());

  // every retained point lands in exactly one row
  random::Rng rng(3);
  std::vector<worldsim::DetectionRecord> cloud;
  for (int i = 0; i < 500; ++i) {
    const auto& row = layout.rows[rng.uniform_int(0, int(layout.rows.size()) - 1)];
    const auto& vol = row.plant_volumes[rng.uniform_int(0, 3)];
    worldsim::DetectionRecord d;
    d.point = Vec3(rng.uniform(vol.lo.x(), vol.hi.x()),
                   rng.uniform(vol.lo.y(), vol.hi.y()),
                   rng.uniform(vol.lo.z(), vol.hi.z()));
    cloud.push_back(d);
  }
  const auto parts = split_by_row(cloud, layout, params);
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  CHECK(total == cloud.size());
}

TEST_CASE("subsample: cap arithmetic and order preservation") {
  CountingParams params;
  random::Rng rng(17);

  std::vector<Vec3> small;
  for (int i = 0; i < 50; ++i) small.push_back(Vec3(i, 0, 0));
  const auto same = subsample(small, params, 40, rng);  // cap 320
  REQUIRE(same.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(same[i] == small[i]);

  std::vector<Vec3> big;
  for (int i = 0; i < 1000; ++i) big.push_back(Vec3(i, 0, 0));
  const auto cut = subsample(big, params, 40, rng);
  REQUIRE(cut.size() == 320);
  for (std::size_t i = 1; i < cut.size(); ++i) {
    CHECK(cut[i].x() > cut[i - 1].x());  // strictly increasing source order
  }

  random::Rng rng_a(5);
  random::Rng rng_b(5);
  const auto a = subsample(big, params, 40, rng_a);
  const auto b = subsample(big, params, 40, rng_b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  // per-fruit retention on a full row: 40 fruits, 20 detections each
  std::vector<Vec3> row;
  for (int f = 0; f < 40; ++f) {
    for (int k = 0; k < 20; ++k) row.push_back(Vec3(f, k, 0));
  }
  const auto kept = subsample(row, params, 40, rng);
  REQUIRE(kept.size() == 320);
  const double per_fruit = double(kept.size()) / 40.0;
  CHECK(per_fruit >= 5.0);
  CHECK(per_fruit <= 10.0);
}

TEST_CASE("augment: padding to the fixed-size set") {
  CountingParams params;
  random::Rng rng(29);

  SUBCASE("input at target passes through") {
    std::vector<Vec3> dets;
    for (int i = 0; i < 500; ++i) dets.push_back(Vec3(0.001 * i, 0, 0));
    const auto set = augment(dets, params, rng);
    REQUIRE(set.points.size() == 500);
    CHECK(set.n_init == 500);
    for (int i = 0; i < 500; ++i) {
      CHECK(set.points[i] == dets[i]);
      CHECK(set.synthetic[i] == 0);
    }
  }

  SUBCASE("single detection spawns 499 neighbors") {
    const std::vector<Vec3> dets{Vec3(1, 2, 3)};
    const auto set = augment(dets, params, rng);
    REQUIRE(set.points.size() == 500);
    CHECK(set.n_init == 1);
    int synthetic = 0;
    for (std::size_t i = 0; i < set.points.size(); ++i) {
      if (set.synthetic[i]) {
        ++synthetic;
        CHECK((set.points[i] - dets[0]).norm() <= 4.0 * params.noise_sigma + 1e-12);
      }
    }
    CHECK(synthetic == 499);
  }

  SUBCASE("hundred originals") {
    std::vector<Vec3> dets;
    for (int i = 0; i < 100; ++i) dets.push_back(Vec3(0, 0.01 * i, 0));
    const auto set = augment(dets, params, rng);
    CHECK(set.points.size() == 500);
    CHECK(set.n_init == 100);
  }

  SUBCASE("zero noise duplicates originals") {
    CountingParams quiet = params;
    quiet.noise_sigma = 0.0;
    const std::vector<Vec3> dets{Vec3(1, 1, 1), Vec3(2, 2, 2)};
    const auto set = augment(dets, quiet, rng);
    for (std::size_t i = 0; i < set.points.size(); ++i) {
      CHECK((set.points[i] == dets[0] || set.points[i] == dets[1]));
    }
  }

  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(augment({}, params, rng), std::invalid_argument);
    std::vector<Vec3> over(501, Vec3::Zero());
    CHECK_THROWS_AS(augment(over, params, rng), std::invalid_argument);
  }
}

TEST_CASE("filter_by_layout: plant volumes only, idempotent") {
  const auto layout = worldsim::GreenhouseLayout::make();
  const auto& row = layout.rows[0];

  AugmentedSet set;
  set.points.push_back(row.plant_centers[0]);           // kept
  set.synthetic.push_back(0);
  set.points.push_back(Vec3(row.table.center().x(),
                            row.table.center().y(), 0.8));  // table surface
  set.synthetic.push_back(0);
  set.points.push_back(row.plant_centers[2] + Vec3(0, 0, 5.0));  // far away
  set.synthetic.push_back(1);
  set.points.push_back(row.plant_centers[1] + Vec3(0.1, 0.1, 0.2));  // kept
  set.synthetic.push_back(1);
  set.n_init = 2;

  const auto f1 = filter_by_layout(set, row);
  REQUIRE(f1.points.size() == 2);
  CHECK(f1.n_init == 1);
  CHECK(f1.points[0] == row.plant_centers[0]);

  const auto f2 = filter_by_layout(f1, row);
  REQUIRE(f2.points.size() == f1.points.size());
  CHECK(f2.n_init == f1.n_init);
  for (std::size_t i = 0; i < f1.points.size(); ++i) {
    CHECK(f2.points[i] == f1.points[i]);
  }
}

TEST_CASE("optics_order: two-point and singleton cases") {
  const double inf = std::numeric_limits<double>::infinity();

  const std::vector<Vec3> pair{Vec3(0, 0, 0), Vec3(0.01, 0, 0)};
  const auto res = optics_order(pair, 0.04, 2);
  REQUIRE(res.order.size() == 2);
  CHECK(res.order[0] == 0);
  CHECK(res.order[1] == 1);
  CHECK(res.reachability[0] == inf);
  CHECK(res.reachability[1] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(res.core_dist[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(res.core_dist[1] == doctest::Approx(0.01).epsilon(1e-12));

  const auto single = optics_order({Vec3(5, 5, 5)}, 0.04, 2);
  REQUIRE(single.order.size() == 1);
  CHECK(single.reachability[0] == inf);
  CHECK(single.core_dist[0] == inf);

  CHECK_THROWS_AS(optics_order(pair, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(optics_order(pair, 0.04, 1), std::invalid_argument);
}

TEST_CASE("optics_order: output is a permutation") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  std::vector<Vec3> pts;
  for (int i = 0; i < 120; ++i) pts.push_back(Vec3(u(gen), u(gen), u(gen)));
  const auto res = optics_order(pts, 0.04, 4);
  REQUIRE(res.order.size() == pts.size());
  std::vector<int> sorted = res.order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < int(pts.size()); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("cluster extraction equals brute-force DBSCAN on random instances") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double eps_pool[4] = {0.02, 0.04, 0.06, 0.08};

  for (int instance = 0; instance < 200; ++instance) {
    std::vector<Vec3> pts;
    const int blobs = 1 + int(u01(gen) * 6);
    for (int b = 0; b < blobs && int(pts.size()) < 180; ++b) {
      const Vec3 c(u01(gen) * 0.5, u01(gen) * 0.5, u01(gen) * 0.5);
      const double sigma = 0.005 + 0.025 * u01(gen);
      const int m = 5 + int(u01(gen) * 55);
      std::normal_distribution<double> g(0.0, sigma);
      for (int k = 0; k < m && int(pts.size()) < 180; ++k) {
        pts.push_back(c + Vec3(g(gen), g(gen), g(gen)));
      }
    }
    const int noise = int(u01(gen) * 20);
    for (int k = 0; k < noise; ++k) {
      pts.push_back(Vec3(u01(gen) * 0.5, u01(gen) * 0.5, u01(gen) * 0.5));
    }

    const double eps = eps_pool[instance % 4];
    const int min_pts = 2 + int(u01(gen) * 7);

    const auto res = extract_clusters(pts, optics_order(pts, eps, min_pts), eps);
    const auto mine = oracle::canonical_partition(labels_from(res, int(pts.size())));
    const auto ref =
        oracle::canonical_partition(oracle::dbscan(pts, eps, min_pts));
    REQUIRE(mine == ref);
  }
}

TEST_CASE("extract_clusters: separated groups and degenerate pile") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(Vec3(g(gen), g(gen), g(gen)));
  for (int i = 0; i < 10; ++i) pts.push_back(Vec3(0.5 + g(gen), g(gen), g(gen)));

  const auto res = extract_clusters(pts, optics_order(pts, 0.04, 4), 0.04);
  REQUIRE(res.clusters.size() == 2);
  for (const auto& cluster : res.clusters) {
    CHECK(int(cluster.members.size()) >= 4);
    Vec3 lo = pts[cluster.members[0]];
    Vec3 hi = lo;
    for (const int i : cluster.members) {
      lo = lo.cwiseMin(pts[i]);
      hi = hi.cwiseMax(pts[i]);
    }
    CHECK((cluster.center.array() >= lo.array() - 1e-12).all());
    CHECK((cluster.center.array() <= hi.array() + 1e-12).all());
  }

  const std::vector<Vec3> pile(30, Vec3(1, 2, 3));
  const auto one = extract_clusters(pile, optics_order(pile, 0.04, 5), 0.04);
  REQUIRE(one.clusters.size() == 1);
  CHECK(one.clusters[0].members.size() == 30);
  CHECK(one.undefined.empty());
}

TEST_CASE("count_row: empty input and a single pepper") {
  const auto layout = worldsim::GreenhouseLayout::make();
  const auto& row = layout.rows[0];
  const CountingParams params;

  random::Rng rng(4);
  CHECK(count_row({}, row, params, rng).count == 0);

  const Vec3 pepper = row.plant_centers[1] + Vec3(0.05, 0.1, -0.1);
  std::vector<Vec3> dets;
  for (int i = 0; i < 6; ++i) dets.push_back(pepper + truncated_noise(rng, 0.005));
  const auto result = count_row(dets, row, params, rng);
  CHECK(result.count == 1);
  CHECK(result.n_init == 6);
  CHECK(result.min_pts == 2 * 84);  // ceil(500/6) = 84
  REQUIRE(result.centers.size() == 1);
  CHECK((result.centers[0] - pepper).norm() < 0.02);
}

TEST_CASE("count_row: exact count for well-separated repeated detections") {
  const auto layout = worldsim::GreenhouseLayout::make();
  const auto& row = layout.rows[0];
  const CountingParams params;

  const std::vector<Vec3> truth{
      row.plant_centers[0] + Vec3(-0.1, 0.0, -0.15),
      row.plant_centers[0] + Vec3(0.1, 0.05, 0.2),
      row.plant_centers[1] + Vec3(0.0, -0.1, 0.0),
      row.plant_centers[2] + Vec3(0.05, 0.1, 0.12),
      row.plant_centers[3] + Vec3(-0.08, 0.0, -0.2),
  };
  std::vector<Vec3> dets;
  for (const auto& p : truth) {
    for (int k = 0; k < 10; ++k) dets.push_back(p);
  }

  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    random::Rng rng(seed);
    const auto result = count_row(dets, row, params, rng);
    CHECK(result.count == int(truth.size()));
  }
}

TEST_CASE("count_row: seven-pepper scene is recovered across seeds") {
  const auto layout = worldsim::GreenhouseLayout::make();
  const auto& row = layout.rows[0];
  const CountingParams params;
  const double cx = row.table.center().x();
  const double cy = row.table.center().y();

  const std::vector<Vec3> truth{
      Vec3(cx - 0.75, cy - 0.05, 1.05), Vec3(cx - 0.75, cy + 0.05, 1.45),
      Vec3(cx - 0.25, cy, 1.10),        Vec3(cx - 0.25, cy, 1.45),
      Vec3(cx + 0.25, cy - 0.05, 1.25), Vec3(cx + 0.75, cy + 0.05, 1.05),
      Vec3(cx + 0.75, cy, 1.40),
  };

  int exact = 0;
  const int trials = 20;
  for (int seed = 0; seed < trials; ++seed) {
    random::Rng rng(1000 + seed);
    std::vector<Vec3> dets;
    for (const auto& p : truth) {
      const int m = rng.uniform_int(5, 10);
      for (int k = 0; k < m; ++k) dets.push_back(p + truncated_noise(rng, 0.01));
    }
    const auto result = count_row(dets, row, params, rng);
    if (result.count == 7) {
      ++exact;
      for (const auto& p : truth) {
        double best = 1e9;
        for (const auto& c : result.centers) best = std::min(best, (c - p).norm());
        CHECK(best < 0.05);
      }
    }
  }
  CHECK(exact >= 19);
}

TEST_CASE("count_row: deterministic for a fixed seed") {
  const auto layout = worldsim::GreenhouseLayout::make();
  const auto& row = layout.rows[2];
  const CountingParams params;

  std::vector<Vec3> dets;
  random::Rng noise(55);
  for (int f = 0; f < 4; ++f) {
    const Vec3 p = row.plant_centers[f] + Vec3(0.05, -0.05, 0.1);
    for (int k = 0; k < 8; ++k) dets.push_back(p + truncated_noise(noise, 0.01));
  }

  random::Rng rng_a(9);
  random::Rng rng_b(9);
  const auto a = count_row(dets, row, params, rng_a);
  const auto b = count_row(dets, row, params, rng_b);
  CHECK(a.count == b.count);
  CHECK(a.n_init == b.n_init);
  CHECK(a.undefined == b.undefined);
  REQUIRE(a.centers.size() == b.centers.size());
  for (std::size_t i = 0; i < a.centers.size(); ++i) {
    CHECK(a.centers[i] == b.centers[i]);
  }
}
