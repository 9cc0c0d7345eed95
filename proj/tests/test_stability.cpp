#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "balcl/cost.hpp"
#include "balcl/instances.hpp"
#include "balcl/rng.hpp"
#include "balcl/stability.hpp"

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

// Canonical partition comparison: sort members, sort clusters.
std::vector<std::vector<int>> canon(std::vector<std::vector<int>> cs) {
  for (auto& c : cs) std::sort(c.begin(), c.end());
  cs.erase(std::remove_if(cs.begin(), cs.end(), [](auto& c) { return c.empty(); }), cs.end());
  std::sort(cs.begin(), cs.end());
  return cs;
}

std::vector<std::vector<int>> assignment_clusters(const Assignment& a) {
  std::vector<std::vector<int>> out;
  std::vector<int> index(a.centers.size());
  for (std::size_t c = 0; c < a.centers.size(); ++c) index[c] = a.centers[c];
  for (int j = 0; j < a.n(); ++j) {
    int c = a.assign[j][0].first;
    auto it = std::find(index.begin(), index.end(), c);
    std::size_t pos = static_cast<std::size_t>(it - index.begin());
    if (out.size() <= pos) out.resize(index.size());
    out.resize(index.size());
    out[pos].push_back(j);
  }
  return out;
}

// Three well-separated unit-diameter cliques of 3 points each on a line.
Instance three_cliques() {
  std::vector<double> pts;
  for (double base : {0.0, 100.0, 200.0}) {
    pts.push_back(base);
    pts.push_back(base + 0.5);
    pts.push_back(base + 1.0);
  }
  return Instance::from_points(std::move(pts), 1);
}

}  // namespace

TEST_CASE("bbg_cluster recovers separated cliques at the intra-clique diameter") {
  auto inst = three_cliques();
  auto tc = bbg_cluster(inst, 3, 1.0);
  auto cs = canon(tc.clusters);
  REQUIRE(cs.size() == 3);
  CHECK(cs[0] == std::vector<int>{0, 1, 2});
  CHECK(cs[1] == std::vector<int>{3, 4, 5});
  CHECK(cs[2] == std::vector<int>{6, 7, 8});
  for (char a : tc.attached) CHECK(a == 0);
}

TEST_CASE("bbg_cluster carves by degree, ties to the lowest index") {
  // Vertex 1 has the highest degree at tau = 1: neighbors {0, 2}.
  auto inst = Instance::from_points({0.0, 1.0, 2.0, 10.0}, 1);
  auto tc = bbg_cluster(inst, 2, 1.0);
  auto cs = canon(tc.clusters);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0] == std::vector<int>{0, 1, 2});
  CHECK(cs[1] == std::vector<int>{3});
}

TEST_CASE("bbg_cluster at tau = 0") {
  SUBCASE("distinct points: singleton carvings plus attachment") {
    auto inst = Instance::from_points({0.0, 1.0, 2.0, 3.0}, 1);
    auto tc = bbg_cluster(inst, 2, 0.0);
    std::size_t total = 0;
    for (auto& c : tc.clusters) total += c.size();
    CHECK(total == 4);
    CHECK(tc.clusters.size() == 2);
    // Two carved singletons; the others were attached by distance.
    int attached = 0;
    for (char a : tc.attached) attached += a;
    CHECK(attached == 2);
  }

  SUBCASE("co-located points exhaust the graph early") {
    auto inst = Instance::from_points({5.0, 5.0, 5.0, 5.0}, 1);
    CHECK_THROWS_AS(bbg_cluster(inst, 2, 0.0), SuggestLargerTau);
  }
}

TEST_CASE("bbg_cluster with k = 1 returns everything") {
  auto inst = three_cliques();
  auto tc = bbg_cluster(inst, 1, 1.0);
  REQUIRE(tc.clusters.size() == 1);
  CHECK(tc.clusters[0].size() == 9);
}

TEST_CASE("capacity_repair") {
  SUBCASE("already-feasible clusters are returned unchanged") {
    auto inst = Instance::from_points({0.0, 1.0, 10.0, 11.0}, 1);
    std::vector<std::vector<int>> cs = {{0, 1}, {2, 3}};
    auto [out, moves] = capacity_repair(inst, cs, 0.5, 0.5);
    CHECK(moves == 0);
    CHECK(canon(out) == canon(cs));
  }

  SUBCASE("(8,2) with ell = 0.3 takes one move to (7,3)") {
    std::vector<double> pts;
    for (int j = 0; j < 8; ++j) pts.push_back(static_cast<double>(j) * 0.01);
    pts.push_back(50.0);
    pts.push_back(50.01);
    auto inst = Instance::from_points(std::move(pts), 1);
    std::vector<std::vector<int>> cs = {{0, 1, 2, 3, 4, 5, 6, 7}, {8, 9}};
    auto [out, moves] = capacity_repair(inst, cs, 0.3, 0.8);
    CHECK(moves == 1);
    std::vector<std::size_t> sizes;
    for (auto& c : out) sizes.push_back(c.size());
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{3, 7});
  }

  SUBCASE("(10,0,0) with window [2,6] takes four moves") {
    std::vector<double> pts(10);
    for (int j = 0; j < 10; ++j) pts[j] = static_cast<double>(j);
    auto inst = Instance::from_points(std::move(pts), 1);
    std::vector<std::vector<int>> cs = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {}, {}};
    auto [out, moves] = capacity_repair(inst, cs, 0.2, 0.6);
    CHECK(moves == 4);
    for (auto& c : out) {
      CHECK(c.size() >= 2);
      CHECK(c.size() <= 6);
    }
  }

  SUBCASE("repair is idempotent") {
    std::vector<double> pts(10);
    for (int j = 0; j < 10; ++j) pts[j] = static_cast<double>(j);
    auto inst = Instance::from_points(pts, 1);
    std::vector<std::vector<int>> cs = {{0, 1, 2, 3, 4, 5, 6, 7}, {8}, {9}};
    auto [out, moves] = capacity_repair(inst, cs, 0.2, 0.6);
    CHECK(moves > 0);
    auto [again, moves2] = capacity_repair(inst, out, 0.2, 0.6);
    CHECK(moves2 == 0);
    CHECK(canon(again) == canon(out));
  }

  SUBCASE("infeasible window is rejected") {
    auto inst = Instance::from_points({0.0, 1.0}, 1);
    std::vector<std::vector<int>> cs = {{0}, {1}};
    CHECK_THROWS_AS(capacity_repair(inst, cs, 0.9, 1.0), InvalidArgument);
  }
}

TEST_CASE("tau_sweep recovers stable cliques and scores by k-median cost") {
  auto inst = three_cliques();
  auto tc = tau_sweep(inst, 3, 0.2, 0.5);
  auto cs = canon(tc.clusters);
  REQUIRE(cs.size() == 3);
  CHECK(cs[0] == std::vector<int>{0, 1, 2});
  CHECK(cs[1] == std::vector<int>{3, 4, 5});
  CHECK(cs[2] == std::vector<int>{6, 7, 8});
}

TEST_CASE("tau_sweep with n = k picks zero-cost singletons") {
  auto inst = Instance::from_points({0.0, 3.0, 9.0}, 1);
  auto tc = tau_sweep(inst, 3, 1.0 / 3.0, 1.0 / 3.0);
  auto cs = canon(tc.clusters);
  REQUIRE(cs.size() == 3);
  for (auto& c : cs) CHECK(c.size() == 1);
}

TEST_CASE("kcenter_stable") {
  SUBCASE("recovers separated balanced cliques at the intra-clique radius") {
    auto inst = three_cliques();
    auto res = kcenter_stable(inst, 3, 0.2, 0.5);
    REQUIRE(res.has_value());
    CHECK(res->r_star == doctest::Approx(0.5));  // spacing within a clique
    CHECK(canon(res->clustering.clusters).size() == 3);
  }

  SUBCASE("a uniform chain is not stable") {
    std::vector<double> pts(8);
    for (int j = 0; j < 8; ++j) pts[j] = static_cast<double>(j);
    auto inst = Instance::from_points(std::move(pts), 1);
    // No threshold yields exactly 2 balanced components: the chain merges
    // from 8 components straight into 1 as r crosses 1.
    auto res = kcenter_stable(inst, 2, 0.25, 0.75);
    CHECK_FALSE(res.has_value());
  }

  SUBCASE("k = 1 succeeds at the diameter") {
    auto inst = Instance::from_points({0.0, 1.0, 5.0}, 1);
    auto res = kcenter_stable(inst, 1, 0.0, 1.0);
    REQUIRE(res.has_value());
    CHECK(res->clustering.clusters.size() == 1);
  }

  SUBCASE("matches the oracle on the margin family") {
    // A = {-0.05, 0, 0.05}, B1 = {0.9}, B2 = {1.85, 1.9, 1.95}: the optimum
    // groups B1 with A under a (4,3) balance window.
    auto inst = Instance::from_points({-0.05, 0.0, 0.05, 0.9, 1.85, 1.9, 1.95}, 1);
    double ell = 0.4, L = 0.6;  // counts in [3, 4]
    auto res = kcenter_stable(inst, 2, ell, L);
    REQUIRE(res.has_value());
    auto cs = canon(res->clustering.clusters);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0] == std::vector<int>{0, 1, 2, 3});
    CHECK(cs[1] == std::vector<int>{4, 5, 6});

    auto cons = make_cons(2, 1, ell, L);
    auto opt = brute_force_opt(inst, cons, Objective::KCenter);
    auto ocs = canon(assignment_clusters(opt.assignment));
    CHECK(ocs == cs);
    CHECK(res->r_star <= opt.value + 1e-9);
  }
}
