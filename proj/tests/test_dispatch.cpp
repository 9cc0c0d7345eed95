#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "balcl/dispatch.hpp"
#include "balcl/instances.hpp"
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

PointSet make_points(std::vector<double> data, int dim) {
  PointSet s;
  s.dim = dim;
  s.n = static_cast<int>(data.size()) / dim;
  s.data = std::move(data);
  return s;
}

PointSet gaussian_points(int n, int dim, Rng& rng, double scale = 1.0, double shift = 0.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(n) * dim);
  for (auto& v : d) v = shift + scale * g(rng);
  return make_points(std::move(d), dim);
}

}  // namespace

TEST_CASE("exact_nn breaks ties toward the lowest index") {
  std::vector<double> pts = {1.0, 1.0, 3.0};
  double q = 2.0;
  CHECK(exact_nn(pts.data(), 3, 1, &q) == 0);  // 1 and 3 equidistant
  double q2 = 2.9;
  CHECK(exact_nn(pts.data(), 3, 1, &q2) == 2);
}

TEST_CASE("estimate_weights") {
  SUBCASE("S' = S gives uniform 1/n") {
    auto S = make_points({0.0, 5.0, 9.0}, 1);
    auto est = estimate_weights(S, S);
    REQUIRE(est.w_hat.size() == 3);
    for (double w : est.w_hat) CHECK(w == doctest::Approx(1.0 / 3.0));
  }

  SUBCASE("S = {0,10}, S' = {1,2,9} gives (2/3, 1/3)") {
    auto S = make_points({0.0, 10.0}, 1);
    auto Sp = make_points({1.0, 2.0, 9.0}, 1);
    auto est = estimate_weights(S, Sp);
    CHECK(est.w_hat[0] == doctest::Approx(2.0 / 3.0));
    CHECK(est.w_hat[1] == doctest::Approx(1.0 / 3.0));
    CHECK(est.counts[0] == 2);
    CHECK(est.counts[1] == 1);
  }

  SUBCASE("singleton S absorbs everything") {
    auto S = make_points({4.0}, 1);
    auto Sp = make_points({-3.0, 100.0}, 1);
    auto est = estimate_weights(S, Sp);
    CHECK(est.w_hat[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("estimate_alpha") {
  SUBCASE("holdout inside S is zero") {
    auto S = make_points({0.0, 5.0, 9.0}, 1);
    auto H = make_points({5.0, 9.0}, 1);
    CHECK(estimate_alpha(S, H, 1) == doctest::Approx(0.0));
    CHECK(estimate_alpha(S, H, 2) == doctest::Approx(0.0));
  }

  SUBCASE("S = {0,1}, holdout {0.4}") {
    auto S = make_points({0.0, 1.0}, 1);
    auto H = make_points({0.4}, 1);
    CHECK(estimate_alpha(S, H, 1) == doctest::Approx(0.4));
    CHECK(estimate_alpha(S, H, 2) == doctest::Approx(0.16));
  }

  SUBCASE("alpha shrinks as the sample grows") {
    auto rng = make_rng(42);
    auto holdout = gaussian_points(400, 3, rng);
    double prev = kInf;
    for (int n : {20, 200, 2000}) {
      auto S = gaussian_points(n, 3, rng);
      double alpha = estimate_alpha(S, holdout, 2);
      CHECK(alpha < prev);
      prev = alpha;
    }
  }
}

TEST_CASE("rp-tree") {
  auto rng = make_rng(7);

  SUBCASE("leaf_size >= n keeps one exact leaf") {
    auto S = gaussian_points(30, 4, rng);
    auto tree = build_rptree(S.data, S.n, S.dim, 32, rng);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf);
    // Queries are exact.
    for (int q = 0; q < S.n; ++q) CHECK(nn_query(tree, S.row(q)) == q);
  }

  SUBCASE("two points split or stay per leaf_size") {
    auto S = make_points({0.0, 9.0}, 1);
    auto tree = build_rptree(S.data, S.n, S.dim, 1, rng);
    CHECK(nn_query(tree, S.row(0)) == 0);
    CHECK(nn_query(tree, S.row(1)) == 1);
  }

  SUBCASE("depth respects the rank-split bound") {
    const int n = 1000, leaf = 32;
    auto S = gaussian_points(n, 10, rng);
    auto tree = build_rptree(S.data, S.n, S.dim, leaf, rng);
    int max_depth = 0;
    // BFS from the root tracking depth.
    std::vector<std::pair<int, int>> stack = {{0, 0}};
    while (!stack.empty()) {
      auto [id, d] = stack.back();
      stack.pop_back();
      max_depth = std::max(max_depth, d);
      const auto& node = tree.nodes[id];
      if (!node.is_leaf) {
        stack.push_back({node.left, d + 1});
        stack.push_back({node.right, d + 1});
      } else {
        CHECK(static_cast<int>(node.points.size()) <= leaf);
      }
    }
    int bound = static_cast<int>(std::ceil(std::log2(static_cast<double>(n) / leaf))) + 1;
    CHECK(max_depth <= bound);
  }

  SUBCASE("leaves partition the points") {
    auto S = gaussian_points(257, 6, rng);
    auto tree = build_rptree(S.data, S.n, S.dim, 16, rng);
    std::vector<int> seen(S.n, 0);
    for (const auto& node : tree.nodes)
      if (node.is_leaf)
        for (int p : node.points) seen[p]++;
    for (int c : seen) CHECK(c == 1);
  }

  SUBCASE("recall@1 on 1000-point 10-D Gaussian data with leaf 32") {
    // Tree sample and queries drawn from the same mixture.
    auto grng = make_rng(777);
    auto inst = gen_gaussian_mixture(16, 10, 0.02, 1500, grng);
    const int n = 1000;
    std::vector<double> tree_pts(inst.points.begin(), inst.points.begin() + n * 10);
    auto trng = make_rng(778);
    auto tree = build_rptree(tree_pts, n, 10, 32, trng);

    // Point-level NN recall of a single defeatist descent: modest by design
    // (one wrong split anywhere on the path loses the exact neighbor).
    int nn_hit = 0;
    for (int q = 0; q < 500; ++q) {
      const double* x = inst.point(n + q);
      if (nn_query(tree, x) == exact_nn(tree_pts.data(), n, 10, x)) ++nn_hit;
    }
    CHECK(nn_hit >= 250);  // measured ~0.6

    // Routed-id recall@1 >= 0.8: a missed neighbor almost always belongs to
    // the same cluster, which is what routing consumes.
    PointSet S;
    S.n = n;
    S.dim = 10;
    S.data = tree_pts;
    auto cons = make_cons(8, 1, 0.05, 0.3);
    FitOptions exact_opts;
    exact_opts.backend = NnBackend::Exact;
    FitOptions tree_opts;
    tree_opts.backend = NnBackend::Tree;
    tree_opts.leaf_size = 32;
    auto r1 = make_rng(9);
    auto r2 = make_rng(9);
    auto de = fit_dispatcher(S, S, cons, exact_opts, r1);
    auto dt = fit_dispatcher(S, S, cons, tree_opts, r2);
    int agree = 0;
    for (int q = 0; q < 500; ++q) {
      const double* x = inst.point(n + q);
      if (de->route(x)[0] == dt->route(x)[0]) ++agree;
    }
    CHECK(agree >= 400);  // measured ~0.95
  }
}

TEST_CASE("fit_dispatcher kmeanspp path") {
  auto rng = make_rng(20);

  SUBCASE("subsample of size k becomes the identity routing") {
    auto S = make_points({0.0, 0.0, 10.0, 0.0, 0.0, 10.0}, 2);
    auto cons = make_cons(3, 1, 1.0 / 3.0, 1.0 / 3.0);
    FitOptions opts;
    auto disp = fit_dispatcher(S, S, cons, opts, rng);
    REQUIRE(disp != nullptr);
    CHECK(disp->k() == 3);
    CHECK(disp->p() == 1);
    std::set<int> ids;
    for (int j = 0; j < 3; ++j) {
      auto r = disp->route(S.row(j));
      REQUIRE(r.size() == 1);
      ids.insert(r[0]);
    }
    CHECK(ids.size() == 3);  // distinct clusters, one per point
  }

  SUBCASE("two 80/20 blobs: weighted loads respect the window") {
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<double> sdata, pdata;
    auto grow = [&](std::vector<double>& dst, int count, double cx) {
      for (int j = 0; j < count; ++j) {
        dst.push_back(cx + g(rng));
        dst.push_back(g(rng));
      }
    };
    // Subsample is balanced across blobs, but the second sample says the
    // first blob carries 80% of the mass.
    grow(sdata, 30, 0.0);
    grow(sdata, 30, 20.0);
    grow(pdata, 800, 0.0);
    grow(pdata, 200, 20.0);
    auto S = make_points(std::move(sdata), 2);
    auto Sp = make_points(std::move(pdata), 2);
    auto cons = make_cons(2, 1, 0.3, 0.7);
    FitOptions opts;
    opts.seeding.seed = 99;
    auto disp = fit_dispatcher(S, Sp, cons, opts, rng);
    REQUIRE(disp != nullptr);
    // Estimated masses per cluster stay within the (slackened) window.
    const auto& w = disp->weight_estimate();
    REQUIRE(static_cast<int>(w.size()) == S.n);
    std::vector<double> mass(disp->k(), 0.0);
    for (int i = 0; i < S.n; ++i) mass[disp->ids()[i]] += w[i];
    double wmax = *std::max_element(w.begin(), w.end());
    for (double m : mass) {
      CHECK(m >= 0.3 - wmax - 1e-9);
      CHECK(m <= 0.7 + wmax + 1e-9);
    }
    CHECK(disp->fit_report().max_upper_factor <= (0.7 + wmax) / 0.7 + 1e-9);
  }
}

TEST_CASE("fit_dispatcher lp-round path produces p replicas") {
  auto rng = make_rng(21);
  auto S = gaussian_points(12, 2, rng);
  auto cons = make_cons(4, 2, 0.1, 0.6);
  FitOptions opts;
  opts.algo = FitAlgo::LpRound;
  opts.objective = Objective::KMedian;
  auto disp = fit_dispatcher(S, S, cons, opts, rng);
  REQUIRE(disp != nullptr);
  CHECK(disp->p() == 2);
  auto r = disp->route(S.row(0));
  CHECK(r.size() == 2);
  for (int id : r) {
    CHECK(id >= 0);
    CHECK(id < disp->k());
  }
}

TEST_CASE("fit_dispatcher oracle path on a tiny subsample") {
  auto rng = make_rng(22);
  auto S = make_points({0.0, 0.1, 5.0, 5.1, 10.0, 10.1}, 1);
  auto cons = make_cons(3, 1, 0.2, 0.4);
  FitOptions opts;
  opts.algo = FitAlgo::Oracle;
  opts.objective = Objective::KMedian;
  auto disp = fit_dispatcher(S, S, cons, opts, rng);
  REQUIRE(disp != nullptr);
  // Adjacent pairs share a cluster.
  for (int j = 0; j < 6; j += 2)
    CHECK(disp->route(S.row(j)) == disp->route(S.row(j + 1)));
}

TEST_CASE("routing agrees between exact and tree backends on most queries") {
  auto rng = make_rng(23);
  auto S = gaussian_points(600, 2, rng);
  auto cons = make_cons(4, 1, 0.1, 0.5);

  FitOptions exact_opts;
  exact_opts.backend = NnBackend::Exact;
  exact_opts.seeding.seed = 7;
  auto rng1 = make_rng(31);
  auto exact_disp = fit_dispatcher(S, S, cons, exact_opts, rng1);

  FitOptions tree_opts;
  tree_opts.backend = NnBackend::Tree;
  tree_opts.seeding.seed = 7;
  auto rng2 = make_rng(31);
  auto tree_disp = fit_dispatcher(S, S, cons, tree_opts, rng2);

  CHECK_FALSE(exact_disp->uses_tree());
  CHECK(tree_disp->uses_tree());

  auto queries = gaussian_points(500, 2, rng);
  int agree = 0;
  for (int q = 0; q < queries.n; ++q)
    if (exact_disp->route(queries.row(q)) == tree_disp->route(queries.row(q))) ++agree;
  CHECK(agree >= 450);  // >= 90%
}

TEST_CASE("auto backend switches to the tree above 4096 points") {
  auto rng = make_rng(24);
  auto cons = make_cons(2, 1, 0.2, 0.8);
  FitOptions opts;

  auto small = gaussian_points(100, 2, rng);
  auto d1 = fit_dispatcher(small, small, cons, opts, rng);
  CHECK_FALSE(d1->uses_tree());

  auto big = gaussian_points(4200, 2, rng);
  auto d2 = fit_dispatcher(big, big, cons, opts, rng);
  CHECK(d2->uses_tree());
}

TEST_CASE("subsample points route to their own cluster") {
  auto rng = make_rng(25);
  auto S = gaussian_points(200, 3, rng);
  auto cons = make_cons(4, 1, 0.1, 0.5);
  FitOptions opts;
  opts.backend = NnBackend::Exact;
  auto disp = fit_dispatcher(S, S, cons, opts, rng);
  for (int i = 0; i < S.n; ++i) {
    auto r = disp->route(S.row(i));
    CHECK(r[0] == disp->ids()[i]);
  }
}

TEST_CASE("save/load round-trips routes byte-for-byte") {
  auto rng = make_rng(26);
  auto S = gaussian_points(150, 3, rng);
  auto cons = make_cons(3, 1, 0.1, 0.6);
  FitOptions opts;
  auto disp = fit_dispatcher(S, S, cons, opts, rng);

  std::stringstream buf;
  disp->save(buf);
  auto loaded = load_dispatcher(buf);
  REQUIRE(loaded != nullptr);
  CHECK(loaded->type() == disp->type());
  CHECK(loaded->k() == disp->k());
  CHECK(loaded->p() == disp->p());
  CHECK(loaded->dim() == disp->dim());

  auto queries = gaussian_points(200, 3, rng);
  for (int q = 0; q < queries.n; ++q)
    CHECK(loaded->route(queries.row(q)) == disp->route(queries.row(q)));
}

TEST_CASE("load_dispatcher rejects bad magic") {
  std::stringstream buf("JUNKDATA");
  CHECK_THROWS_AS(load_dispatcher(buf), InvalidArgument);
}
