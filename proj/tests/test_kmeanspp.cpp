#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "balcl/cost.hpp"
#include "balcl/instances.hpp"
#include "balcl/kmeanspp.hpp"
#include "balcl/rng.hpp"

using namespace balcl;

namespace {

Constraints make_cons(int k, int p, double ell, double L) {
  Constraints c;
  c.k = k;
  c.p = p;
  c.ell = ell;
  c.cap_L = L;
  return c;
}

double kmeans_cost(const Instance& inst, const std::vector<std::vector<double>>& centers) {
  double total = 0.0;
  for (int j = 0; j < inst.n; ++j) {
    double best = kInf;
    for (auto& c : centers) {
      double s = 0.0;
      for (int t = 0; t < inst.dim; ++t) {
        double d = inst.point(j)[t] - c[t];
        s += d * d;
      }
      best = std::min(best, s);
    }
    total += best;
  }
  return total;
}

// Two Gaussian blobs with equal masses, 10 apart.
Instance two_blobs(int n_per, Rng& rng) {
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> pts;
  std::vector<int> labels;
  for (int j = 0; j < n_per; ++j) {
    pts.push_back(g(rng));
    pts.push_back(g(rng));
    labels.push_back(0);
  }
  for (int j = 0; j < n_per; ++j) {
    pts.push_back(10.0 + g(rng));
    pts.push_back(g(rng));
    labels.push_back(1);
  }
  return Instance::from_points(std::move(pts), 2, std::move(labels));
}

}  // namespace

TEST_CASE("dsquared_seed: m = 1 is uniform") {
  auto inst = Instance::from_points({0.0, 1.0, 2.0, 3.0}, 1);
  auto rng = make_rng(5);
  std::map<int, int> hits;
  const int draws = 40000;
  for (int r = 0; r < draws; ++r) hits[dsquared_seed(inst, 1, rng)[0]]++;
  // Chi-square against uniform over 4 cells, 3 dof, p > 0.001 -> stat < 16.27.
  double stat = 0.0;
  for (int v = 0; v < 4; ++v) {
    double expect = draws / 4.0;
    double diff = hits[v] - expect;
    stat += diff * diff / expect;
  }
  CHECK(stat < 16.27);
}

TEST_CASE("dsquared_seed: never picks a duplicate location while distinct points remain") {
  // Points 0 and 1 share a location; seeding 2 must take {0 or 1} and 2.
  auto inst = Instance::from_points({5.0, 5.0, 9.0}, 1);
  auto rng = make_rng(6);
  for (int r = 0; r < 200; ++r) {
    auto seeds = dsquared_seed(inst, 2, rng);
    std::set<int> s(seeds.begin(), seeds.end());
    REQUIRE(s.size() == 2);
    CHECK(s.count(2) == 1);
  }
}

TEST_CASE("dsquared_seed: second seed follows the d^2 law") {
  // Line {0, 1, 3}: conditioned on the first seed, the second is drawn with
  // probability proportional to squared distance.
  auto inst = Instance::from_points({0.0, 1.0, 3.0}, 1);
  auto rng = make_rng(7);
  const int draws = 90000;
  std::map<std::pair<int, int>, int> hits;
  std::map<int, int> first_hits;
  for (int r = 0; r < draws; ++r) {
    auto seeds = dsquared_seed(inst, 2, rng);
    hits[{seeds[0], seeds[1]}]++;
    first_hits[seeds[0]]++;
  }
  // First seed uniform: chi-square 2 dof.
  double stat = 0.0;
  for (int v = 0; v < 3; ++v) {
    double expect = draws / 3.0;
    double diff = first_hits[v] - expect;
    stat += diff * diff / expect;
  }
  // Second-seed conditionals: d^2 weights per first seed.
  auto second_weights = [&](int f, int s) {
    double d = inst.distance(f, s);
    return d * d;
  };
  for (int f = 0; f < 3; ++f) {
    double wsum = 0.0;
    for (int s = 0; s < 3; ++s)
      if (s != f) wsum += second_weights(f, s);
    for (int s = 0; s < 3; ++s) {
      if (s == f) continue;
      double expect = first_hits[f] * second_weights(f, s) / wsum;
      double diff = hits[{f, s}] - expect;
      if (expect > 0) stat += diff * diff / expect;
    }
  }
  // Total dof = 2 (first) + 3 x 1 (each conditional has 2 cells) = 5.
  // p > 0.001 -> chi-square threshold 20.52.
  CHECK(stat < 20.52);
}

TEST_CASE("greedy_prune keeps exactly k centers, dropping the redundant one") {
  auto rng = make_rng(8);
  auto inst = two_blobs(20, rng);
  // Seeds: two from blob A (indices 0,1 co-located-ish), one from blob B.
  auto pruned = greedy_prune(inst, {0, 1, 20}, 2);
  REQUIRE(pruned.size() == 2);
  // One seed from each blob must survive: dropping the B seed would cost ~100.
  CHECK(((pruned[0] < 20) != (pruned[1] < 20)));
}

TEST_CASE("greedy_prune: identical seeds tie to the lowest index") {
  auto inst = Instance::from_points({1.0, 1.0, 1.0, 1.0}, 1);
  auto pruned = greedy_prune(inst, {0, 1, 2, 3}, 2);
  REQUIRE(pruned.size() == 2);
  CHECK(kmeans_cost(inst, {{1.0}}) == doctest::Approx(0.0));
}

TEST_CASE("greedy_prune: k equal to input size is the identity") {
  auto inst = Instance::from_points({0.0, 4.0, 9.0}, 1);
  auto pruned = greedy_prune(inst, {0, 2}, 2);
  CHECK(pruned == std::vector<int>{0, 2});
}

TEST_CASE("lloyd fixes the true centroids") {
  auto inst = Instance::from_points({0.0, 0.0, 2.0, 0.0, 10.0, 0.0, 12.0, 0.0}, 2);
  std::vector<std::vector<double>> centers = {{1.0, 0.0}, {11.0, 0.0}};
  auto out = lloyd(inst, centers, 5);
  CHECK(out[0][0] == doctest::Approx(1.0));
  CHECK(out[1][0] == doctest::Approx(11.0));
}

TEST_CASE("lloyd: iters = 0 returns the input, iterations never increase cost") {
  auto rng = make_rng(9);
  auto inst = two_blobs(25, rng);
  std::vector<std::vector<double>> centers = {{3.0, 0.0}, {6.0, 0.0}};
  auto same = lloyd(inst, centers, 0);
  CHECK(same == centers);
  double before = kmeans_cost(inst, centers);
  auto after1 = lloyd(inst, centers, 1);
  double mid = kmeans_cost(inst, after1);
  auto after5 = lloyd(inst, centers, 5);
  double end = kmeans_cost(inst, after5);
  CHECK(mid <= before + 1e-9);
  CHECK(end <= mid + 1e-9);
}

TEST_CASE("lloyd_medoid refines matrix instances") {
  auto inst = gen_groups(3, 2, /*perturb=*/true);
  auto medoid_cost = [&](const std::vector<int>& ms) {
    double total = 0.0;
    for (int j = 0; j < inst.n; ++j) {
      double best = -1.0;
      for (int m : ms) {
        double d = inst.distance_sq(m, j);
        if (best < 0 || d < best) best = d;
      }
      total += best;
    }
    return total;
  };

  // One medoid per group is a fixed point.
  auto stay = lloyd_medoid(inst, {0, 3, 6}, 8);
  std::set<int> groups;
  for (int m : stay) groups.insert(m / 3);
  CHECK(groups.size() == 3);

  // A degenerate start inside one group never increases the cost and escapes
  // at least partially (Lloyd may legitimately stop in a local minimum that
  // covers only two groups).
  auto out = lloyd_medoid(inst, {0, 1, 2}, 8);
  REQUIRE(out.size() == 3);
  CHECK(medoid_cost(out) <= medoid_cost({0, 1, 2}) + 1e-12);
  std::set<int> egroups;
  for (int m : out) egroups.insert(m / 3);
  CHECK(egroups.size() >= 2);
}

TEST_CASE("balance_heuristic") {
  auto rng = make_rng(10);

  SUBCASE("already balanced clusters are untouched") {
    auto inst = Instance::from_points({0.0, 1.0, 10.0, 11.0}, 1);
    std::vector<std::vector<int>> clusters = {{0, 1}, {2, 3}};
    auto out = balance_heuristic(inst, clusters, 0.5, 0.5, rng);
    CHECK(out == clusters);
  }

  SUBCASE("(1,9) with window [0.2, 0.6] lands in [2, 6]") {
    std::vector<double> pts;
    pts.push_back(0.0);
    for (int j = 0; j < 9; ++j) pts.push_back(10.0 + 0.01 * j);
    auto inst = Instance::from_points(std::move(pts), 1);
    std::vector<std::vector<int>> clusters = {{0}, {1, 2, 3, 4, 5, 6, 7, 8, 9}};
    auto out = balance_heuristic(inst, clusters, 0.2, 0.6, rng);
    for (auto& c : out) {
      CHECK(c.size() >= 2);
      CHECK(c.size() <= 6);
    }
    std::size_t total = 0;
    for (auto& c : out) total += c.size();
    CHECK(total == 10);
  }

  SUBCASE("one giant cluster splits into near-equal parts") {
    std::vector<double> pts(16);
    for (int j = 0; j < 16; ++j) pts[j] = static_cast<double>(j);
    auto inst = Instance::from_points(std::move(pts), 1);
    std::vector<std::vector<int>> clusters(4);
    for (int j = 0; j < 16; ++j) clusters[0].push_back(j);
    auto out = balance_heuristic(inst, clusters, 1.0 / 8.0, 0.5, rng);
    for (auto& c : out)
      if (!c.empty()) {
        CHECK(c.size() >= 2);
        CHECK(c.size() <= 8);
      }
  }

  SUBCASE("weighted mode respects weighted loads with one-point slack") {
    auto inst = Instance::from_points({0.0, 1.0, 2.0, 10.0, 11.0, 12.0}, 1);
    std::vector<double> w = {0.3, 0.1, 0.1, 0.3, 0.1, 0.1};
    std::vector<std::vector<int>> clusters = {{0, 1, 2, 3, 4, 5}};
    auto out = balance_heuristic(inst, clusters, 0.2, 0.6, rng, &w);
    double wmax = 0.3;
    for (auto& c : out) {
      if (c.empty()) continue;
      double load = 0.0;
      for (int j : c) load += w[j];
      CHECK(load >= 0.2 - wmax - 1e-9);
      CHECK(load <= 0.6 + wmax + 1e-9);
    }
  }
}

TEST_CASE("kmeanspp_balanced") {
  SUBCASE("n = k produces singletons") {
    auto inst = Instance::from_points({0.0, 5.0, 11.0}, 1);
    auto cons = make_cons(3, 1, 1.0 / 3.0, 1.0 / 3.0);
    SeedingConfig config;
    auto rng = make_rng(11);
    auto [a, rep] = kmeanspp_balanced(inst, cons, config, rng);
    CHECK(a.centers.size() == 3);
    CHECK(rep.feasible());
    CHECK(evaluate(inst, a, Objective::KMeans) == doctest::Approx(0.0));
  }

  SUBCASE("p must be 1") {
    auto inst = Instance::from_points({0.0, 5.0, 11.0, 14.0}, 1);
    auto cons = make_cons(3, 2, 0.0, 1.0);
    SeedingConfig config;
    auto rng = make_rng(12);
    CHECK_THROWS_AS(kmeanspp_balanced(inst, cons, config, rng), InvalidArgument);
  }

  SUBCASE("recovers two separated blobs with high purity") {
    int good = 0;
    const int runs = 50;
    for (int r = 0; r < runs; ++r) {
      auto grng = make_rng(1000 + r);
      auto inst = two_blobs(50, grng);
      auto cons = make_cons(2, 1, 0.25, 0.75);
      SeedingConfig config;
      auto rng = make_rng(2000 + r);
      auto [a, rep] = kmeanspp_balanced(inst, cons, config, rng);
      REQUIRE(rep.feasible());  // balance holds on every run
      // Purity: majority label share per cluster.
      std::map<int, std::map<int, int>> by_center;
      for (int j = 0; j < inst.n; ++j)
        by_center[a.assign[j][0].first][inst.labels[j]]++;
      int pure = 0, total = 0;
      for (auto& [c, hist] : by_center) {
        int best = 0, sum = 0;
        for (auto& [lbl, cnt] : hist) {
          best = std::max(best, cnt);
          sum += cnt;
        }
        pure += best;
        total += sum;
      }
      if (pure >= static_cast<int>(0.95 * total)) ++good;
    }
    CHECK(good >= 45);
  }

  SUBCASE("matrix instances run through the medoid path") {
    int zero_cost = 0;
    for (int r = 0; r < 10; ++r) {
      auto inst = gen_groups(3, 2, /*perturb=*/true);
      auto cons = make_cons(3, 1, 0.2, 0.5);
      SeedingConfig config;
      auto rng = make_rng(300 + r);
      auto [a, rep] = kmeanspp_balanced(inst, cons, config, rng);
      CHECK(rep.feasible());
      double value = evaluate(inst, a, Objective::KMeans);
      if (value < 1e-9) ++zero_cost;
    }
    CHECK(zero_cost >= 9);
  }

  SUBCASE("bit-for-bit reproducible for a fixed seed") {
    auto grng = make_rng(13);
    auto inst = two_blobs(30, grng);
    auto cons = make_cons(2, 1, 0.3, 0.7);
    SeedingConfig config;
    auto r1 = make_rng(99);
    auto r2 = make_rng(99);
    auto [a1, rep1] = kmeanspp_balanced(inst, cons, config, r1);
    auto [a2, rep2] = kmeanspp_balanced(inst, cons, config, r2);
    CHECK(a1.centers == a2.centers);
    for (int j = 0; j < inst.n; ++j) CHECK(a1.assign[j] == a2.assign[j]);
    CHECK(rep1.loads == rep2.loads);
  }
}
