#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "balcl/bicriteria.hpp"
#include "balcl/cost.hpp"
#include "balcl/instances.hpp"
#include "balcl/lp_relax.hpp"
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

Instance random_euclidean(int n, int dims, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pts(static_cast<std::size_t>(n) * dims);
  for (auto& v : pts) v = u(rng);
  return Instance::from_points(std::move(pts), dims);
}

// LP rows that every opening move must preserve (y <= 1 may break).
void check_move_invariants(const FractionalSolution& fs, const Constraints& cons) {
  const int n = fs.n;
  const double lo = cons.lower_count(n);
  const double hi = cons.upper_count(n);
  for (int j = 0; j < n; ++j) {
    double served = 0.0;
    for (int i = 0; i < n; ++i) served += fs.xat(i, j);
    CHECK(served == doctest::Approx(static_cast<double>(fs.p)).epsilon(1e-7));
  }
  for (int i = 0; i < n; ++i) {
    double load = 0.0;
    for (int j = 0; j < n; ++j) {
      CHECK(fs.xat(i, j) <= fs.y[i] + 1e-9);
      load += fs.xat(i, j);
    }
    CHECK(load >= lo * fs.y[i] - 1e-7 * (1.0 + lo));
    CHECK(load <= hi * fs.y[i] + 1e-7 * (1.0 + hi));
  }
}

// Two co-located triples 10 apart with fractional openings (0.6, 0.5, 0.4)
// in each: the worked aggregation example.
struct TwoTriples {
  Instance inst;
  FractionalSolution fs;
  Empires emp;
  Constraints cons;
};

TwoTriples make_two_triples() {
  TwoTriples t;
  t.inst = Instance::from_points({0.0, 0.0, 0.0, 10.0, 10.0, 10.0}, 1);
  t.cons = make_cons(3, 2, 0.0, 1.0);
  auto& fs = t.fs;
  fs.n = 6;
  fs.p = 2;
  fs.y = {0.6, 0.5, 0.4, 0.6, 0.5, 0.4};
  fs.x.assign(36, 0.0);
  // x_ij = (2/3) y_i satisfies demand (sum_i y_i = 3), x <= y, capacities.
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) fs.x[static_cast<std::size_t>(i) * 6 + j] = (2.0 / 3.0) * fs.y[i];
  fs.C.assign(6, 0.0);
  fs.sum_y = 3.0;
  fs.C_LP = 0.0;
  auto cm = cost_matrix(t.inst, Objective::KMedian);
  for (int j = 0; j < 6; ++j) {
    double cj = 0.0;
    for (int i = 0; i < 6; ++i) cj += cm.at(i, j) * fs.xat(i, j);
    fs.C[j] = cj / fs.p;
    fs.C_LP += fs.p * fs.C[j];
  }
  t.emp.monarchs = {0, 3};
  t.emp.empire_of = {0, 0, 0, 3, 3, 3};
  t.emp.rho = 2.0;
  return t;
}

}  // namespace

TEST_CASE("monarchs: single point owns itself") {
  auto inst = Instance::from_points({0.0}, 1);
  auto cons = make_cons(1, 1, 0.0, 1.0);
  auto cm = cost_matrix(inst, Objective::KMedian);
  auto fs = solve_relaxation(cm, cons);
  REQUIRE(fs.has_value());
  auto emp = select_monarchs(*fs, cm, inst);
  CHECK(emp.monarchs == std::vector<int>{0});
  CHECK(emp.empire_of == std::vector<int>{0});
}

TEST_CASE("monarchs: two far zero-cost clusters yield two empires") {
  // k = 4 lets the relaxation open two full centers per co-located pair, so
  // every point is served locally (p = 2) at zero cost.
  auto inst = Instance::from_points({0.0, 0.0, 0.0, 0.0, 50.0, 0.0, 50.0, 0.0}, 2);
  auto cons = make_cons(4, 2, 0.0, 1.0);
  auto cm = cost_matrix(inst, Objective::KMedian);
  auto fs = solve_relaxation(cm, cons);
  REQUIRE(fs.has_value());
  REQUIRE(fs->C_LP == doctest::Approx(0.0));
  auto emp = select_monarchs(*fs, cm, inst);
  REQUIRE(emp.monarchs.size() == 2);
  // Each empire is one of the co-located pairs.
  CHECK(emp.empire_of[0] == emp.empire_of[1]);
  CHECK(emp.empire_of[2] == emp.empire_of[3]);
  CHECK(emp.empire_of[0] != emp.empire_of[2]);
}

TEST_CASE("monarchs: groups relaxation produces one monarch per group") {
  auto inst = gen_groups(3, 2);  // 9 points, 3 groups
  auto cons = make_cons(6, 2, 0.1, 0.4);
  auto cm = cost_matrix(inst, Objective::KMedian);
  auto fs = solve_relaxation(cm, cons);
  REQUIRE(fs.has_value());
  auto emp = select_monarchs(*fs, cm, inst);
  CHECK(emp.monarchs.size() == 3);
  for (int j = 0; j < 9; ++j) {
    // Zero-cost relaxation: every point sits in its own group's empire.
    CHECK(emp.empire_of[j] / 3 == j / 3);
  }
  // Lemma guarantee: each empire holds at least p/2 opening.
  for (int u : emp.monarchs) {
    double mass = 0.0;
    for (int j = 0; j < 9; ++j)
      if (emp.empire_of[j] == u) mass += fs->y[j];
    CHECK(mass >= 1.0 - 1e-7);
  }
}

TEST_CASE("move_opening: delta = 0 is the identity") {
  auto t = make_two_triples();
  auto before = t.fs;
  move_opening(t.fs, 0, 1, 0.0);
  CHECK(t.fs.x == before.x);
  CHECK(t.fs.y == before.y);
}

TEST_CASE("move_opening: delta = y_a drains a completely") {
  auto t = make_two_triples();
  move_opening(t.fs, 2, 0, t.fs.y[2]);
  CHECK(t.fs.y[2] == 0.0);
  CHECK(t.fs.y[0] == doctest::Approx(1.0));
  for (int j = 0; j < 6; ++j) CHECK(t.fs.xat(2, j) == 0.0);
  check_move_invariants(t.fs, t.cons);
}

TEST_CASE("move_opening: randomized moves preserve the LP rows") {
  auto rng = make_rng(606);
  int total_moves = 0;
  for (int trial = 0; trial < 10; ++trial) {
    int n = 6 + static_cast<int>(rng() % 5);
    auto inst = random_euclidean(n, 2, rng);
    auto cons = make_cons(4, 2, 0.1, 0.6);
    auto cm = cost_matrix(inst, Objective::KMedian);
    auto fs = solve_relaxation(cm, cons);
    REQUIRE(fs.has_value());
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int m = 0; m < 100; ++m) {
      int a = static_cast<int>(rng() % n);
      if (fs->y[a] <= 1e-9) continue;
      int b = static_cast<int>(rng() % n);
      if (b == a) b = (b + 1) % n;
      move_opening(*fs, a, b, frac(rng) * fs->y[a]);
      ++total_moves;
    }
    check_move_invariants(*fs, cons);
  }
  CHECK(total_moves >= 500);
}

TEST_CASE("aggregation concentrates each empire at level Y/floor(Y)") {
  auto t = make_two_triples();
  auto cm = cost_matrix(t.inst, Objective::KMedian);
  auto agg = aggregate_openings(t.fs, t.emp, cm, t.cons, t.inst);
  // Y_u = 1.5 per empire: floor = 1 member at level 1.5, nearest-first.
  CHECK(agg.fs.y[0] == doctest::Approx(1.5));
  CHECK(agg.fs.y[3] == doctest::Approx(1.5));
  for (int i : {1, 2, 4, 5}) CHECK(agg.fs.y[i] == doctest::Approx(0.0));
  CHECK(agg.support == std::vector<int>{0, 3});
  CHECK(agg.moves.size() == 4);  // two donors drained per empire
  double sum = 0.0;
  for (double v : agg.fs.y) sum += v;
  CHECK(sum == doctest::Approx(t.fs.sum_y));
}

TEST_CASE("aggregation is a no-op on concentrated integral openings") {
  auto inst = Instance::from_points({0.0, 0.0, 10.0, 10.0}, 1);
  FractionalSolution fs;
  fs.n = 4;
  fs.p = 2;
  fs.y = {1.0, 1.0, 1.0, 1.0};
  fs.x.assign(16, 0.0);
  for (int j = 0; j < 4; ++j) {
    int base = (j < 2) ? 0 : 2;
    fs.x[static_cast<std::size_t>(base) * 4 + j] = 1.0;
    fs.x[static_cast<std::size_t>(base + 1) * 4 + j] = 1.0;
  }
  fs.C.assign(4, 0.0);
  fs.sum_y = 4.0;
  auto cons4 = make_cons(4, 2, 0.0, 1.0);
  auto cm = cost_matrix(inst, Objective::KMedian);
  Empires emp;
  emp.monarchs = {0, 2};
  emp.empire_of = {0, 0, 2, 2};
  emp.rho = 2.0;
  auto agg = aggregate_openings(fs, emp, cm, cons4, inst);
  CHECK(agg.moves.empty());
  for (int i = 0; i < 4; ++i) CHECK(agg.fs.y[i] == doctest::Approx(1.0));
  CHECK(agg.support == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("rounding the worked example is exact and balanced") {
  auto t = make_two_triples();
  auto cm = cost_matrix(t.inst, Objective::KMedian);
  auto agg = aggregate_openings(t.fs, t.emp, cm, t.cons, t.inst);
  auto a = round_assignment(agg, cm, t.cons, t.inst);
  CHECK(evaluate(t.inst, a, Objective::KMedian) == doctest::Approx(0.0));
  for (int j = 0; j < 6; ++j) {
    CHECK(a.slots(j) == 2);
    for (auto& [c, m] : a.assign[j]) {
      CHECK(m <= 2);
      (void)c;
    }
  }
}

TEST_CASE("rounding matches exhaustive assignment enumeration") {
  auto rng = make_rng(90210);
  for (int trial = 0; trial < 5; ++trial) {
    auto inst = random_euclidean(6, 1, rng);
    // L = 0.7 keeps the relaxation feasible: k * floor(n*L) = 12 = n*p.
    auto cons = make_cons(3, 2, 0.2, 0.7);
    auto cm = cost_matrix(inst, Objective::KMedian);
    auto fs = solve_relaxation(cm, cons);
    REQUIRE(fs.has_value());
    auto emp = select_monarchs(*fs, cm, inst);
    auto agg = aggregate_openings(*fs, emp, cm, cons, inst);
    auto a = round_assignment(agg, cm, cons, inst);
    double got = evaluate(inst, a, Objective::KMedian);

    // Enumerate every mult-<=2 assignment into the aggregated support under
    // the same load window and take the cheapest.
    const auto& support = agg.support;
    int s = static_cast<int>(support.size());
    std::vector<std::pair<int, int>> choices;  // (first, second) support indices
    for (int u = 0; u < s; ++u)
      for (int v = u; v < s; ++v) choices.push_back({u, v});
    long long lo = cons.lower_count(6);
    long long hi = static_cast<long long>(std::ceil(2.0 * 6 * cons.cap_L - 1e-12));
    double best = -1.0;
    std::vector<int> pick(6, 0);
    std::function<void(int, double)> rec = [&](int j, double acc) {
      if (best >= 0 && acc >= best) return;
      if (j == 6) {
        std::vector<long long> load(s, 0);
        for (int q = 0; q < 6; ++q) {
          load[choices[pick[q]].first]++;
          load[choices[pick[q]].second]++;
        }
        for (int u = 0; u < s; ++u)
          if (load[u] < lo || load[u] > hi) return;
        if (best < 0 || acc < best) best = acc;
        return;
      }
      for (std::size_t c = 0; c < choices.size(); ++c) {
        pick[j] = static_cast<int>(c);
        double add = cm.at(support[choices[c].first], j) + cm.at(support[choices[c].second], j);
        rec(j + 1, acc + add);
      }
    };
    rec(0, 0.0);
    REQUIRE(best >= 0.0);
    CHECK(got == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("pipeline: groups with k = 2k' and p = 2 is exact in cost") {
  auto inst = gen_groups(3, 2);
  auto cons = make_cons(6, 2, 0.1, 0.4);
  auto res = bicriteria_cluster(inst, cons, Objective::KMedian);
  REQUIRE(res.has_value());
  CHECK(res->diag.value == doctest::Approx(0.0));
  CHECK(res->diag.num_open <= 6);
  // Loads stay within the bicriteria window [ceil(n*ell), ceil(2*n*L)]; the
  // flow is free to unbalance zero-cost assignments, so the strict window
  // [ceil(n*ell), floor(n*L)] is not guaranteed.
  CHECK(res->report.max_upper_factor <= 2.0 + 1e-6);
  std::vector<long long> load(inst.n, 0);
  for (int j = 0; j < inst.n; ++j)
    for (auto& [c, m] : res->assignment.assign[j]) load[c] += m;
  for (int c = 0; c < inst.n; ++c) {
    if (load[c] == 0) continue;
    CHECK(load[c] >= cons.lower_count(inst.n));
    CHECK(load[c] <= static_cast<long long>(std::ceil(2.0 * inst.n * cons.cap_L - 1e-12)));
  }
  // Matches the exact optimum.
  auto opt = brute_force_opt(inst, cons, Objective::KMedian);
  CHECK(opt.value == doctest::Approx(0.0));
}

TEST_CASE("pipeline: groups at k = k' pays the cross-group LP cost") {
  // With k = k' and p = 2, x <= y <= 1 forces one unit of every point's
  // demand out of its group fractionally, so C_LP = n(k'-1)/k' * 1 = 9 and no
  // rounding can certify 0 against it. The single-monarch aggregation then
  // concentrates all three openings in the first group: the six points of the
  // other groups each pay 2 cross-group units, for a deterministic value 12.
  auto inst = gen_groups(3, 2);
  auto cons = make_cons(3, 2, 0.1, 1.0);
  auto res = bicriteria_cluster(inst, cons, Objective::KMedian);
  REQUIRE(res.has_value());
  CHECK(res->diag.c_lp == doctest::Approx(9.0));
  CHECK(res->diag.value == doctest::Approx(12.0));
  CHECK(res->diag.value <= 11.0 * res->diag.c_lp + 1e-6);
  // The distinct-replica oracle pays one cross-group unit per point instead.
  auto opt = brute_force_opt(inst, cons, Objective::KMedian);
  CHECK(opt.value == doctest::Approx(9.0));
}

TEST_CASE("pipeline: approximation guarantees on random instances") {
  auto rng = make_rng(1212);
  for (int trial = 0; trial < 6; ++trial) {
    int n = 10 + static_cast<int>(rng() % 5);
    auto inst = random_euclidean(n, 2, rng);
    auto cons = make_cons(4, 2, 0.1, 0.6);
    long long hard_cap = static_cast<long long>(std::ceil(2.0 * n * cons.cap_L - 1e-12));

    for (auto obj : {Objective::KMedian, Objective::KMeans}) {
      auto res = bicriteria_cluster(inst, cons, obj);
      REQUIRE(res.has_value());
      double ratio = (obj == Objective::KMedian) ? 11.0 : 95.0;
      CHECK(res->diag.value <= ratio * res->diag.c_lp + 1e-6 * std::max(1.0, res->diag.c_lp));
      // Integral load bound with zero tolerance, multiplicity <= 2, p slots.
      std::vector<long long> load(n, 0);
      for (int j = 0; j < n; ++j) {
        CHECK(res->assignment.slots(j) == 2);
        for (auto& [c, m] : res->assignment.assign[j]) {
          CHECK(m <= 2);
          load[c] += m;
        }
      }
      for (int c = 0; c < n; ++c) CHECK(load[c] <= hard_cap);
    }
  }
}

TEST_CASE("pipeline: k-center value stays within 5t") {
  auto rng = make_rng(313);
  auto inst = random_euclidean(12, 2, rng);
  auto cons = make_cons(4, 2, 0.1, 0.6);
  auto res = bicriteria_cluster(inst, cons, Objective::KCenter);
  REQUIRE(res.has_value());
  CHECK(res->diag.threshold > 0.0);
  CHECK(res->diag.value <= 5.0 * res->diag.threshold + 1e-9);
}

TEST_CASE("pipeline: p = 1 is rejected") {
  auto rng = make_rng(11);
  auto inst = random_euclidean(8, 2, rng);
  auto cons = make_cons(3, 1, 0.1, 0.8);
  CHECK_THROWS_AS(bicriteria_cluster(inst, cons, Objective::KMedian), InvalidArgument);
}

TEST_CASE("pipeline: deterministic across runs") {
  auto rng = make_rng(21);
  auto inst = random_euclidean(12, 2, rng);
  auto cons = make_cons(4, 2, 0.1, 0.6);
  auto r1 = bicriteria_cluster(inst, cons, Objective::KMedian);
  auto r2 = bicriteria_cluster(inst, cons, Objective::KMedian);
  REQUIRE(r1.has_value());
  REQUIRE(r2.has_value());
  CHECK(r1->assignment.centers == r2->assignment.centers);
  for (int j = 0; j < inst.n; ++j) CHECK(r1->assignment.assign[j] == r2->assignment.assign[j]);
  CHECK(r1->diag.value == doctest::Approx(r2->diag.value));
}

TEST_CASE("pipeline: weighted mode") {
  auto rng = make_rng(41);
  auto inst = random_euclidean(10, 2, rng);
  auto cons = make_cons(4, 2, 0.1, 0.6);

  SUBCASE("uniform weights match the unweighted run") {
    std::vector<double> w(10, 0.1);
    std::vector<long long> units(10, 1);  // U = 10, w_j * U = 1
    auto plain = bicriteria_cluster(inst, cons, Objective::KMedian);
    auto weighted = bicriteria_cluster(inst, cons, Objective::KMedian, &w, &units);
    REQUIRE(plain.has_value());
    REQUIRE(weighted.has_value());
    CHECK(weighted->diag.value ==
          doctest::Approx(plain->diag.value).epsilon(1e-6));
  }

  SUBCASE("skewed weights keep weighted loads within the relaxed cap") {
    std::vector<long long> units = {5, 3, 2, 2, 2, 2, 1, 1, 1, 1};  // U = 20
    long long total = 20;
    std::vector<double> w(10);
    for (int j = 0; j < 10; ++j) w[j] = static_cast<double>(units[j]) / total;
    auto res = bicriteria_cluster(inst, cons, Objective::KMedian, &w, &units);
    REQUIRE(res.has_value());
    // The report is computed with the weights; the bicriteria guarantee
    // allows up to the (p+2)/p = 2 relaxation of L.
    CHECK(res->report.max_upper_factor <= 2.0 + 1e-6);
    for (int j = 0; j < inst.n; ++j) CHECK(res->assignment.slots(j) == 2);
  }
}
