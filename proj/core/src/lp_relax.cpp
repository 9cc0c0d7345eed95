#include "balcl/lp_relax.hpp"

#include <algorithm>
#include <cmath>

#include "balcl/errors.hpp"

namespace balcl {

namespace {

struct VarLayout {
  std::vector<int> verts;                 // global vertex ids
  std::vector<std::pair<int, int>> xs;    // x vars as (i, j) global pairs
  std::vector<int> xid;                   // |V|*|V| -> var id or -1
  int y_base = 0;

  int local(int v) const {
    auto it = std::lower_bound(verts.begin(), verts.end(), v);
    return static_cast<int>(it - verts.begin());
  }
  int x_var(int li, int lj) const { return xid[static_cast<std::size_t>(li) * verts.size() + lj]; }
};

VarLayout make_layout(const CostMatrix& cm, const RelaxOptions& opts) {
  VarLayout lay;
  if (opts.vertices.empty()) {
    lay.verts.resize(cm.n);
    for (int v = 0; v < cm.n; ++v) lay.verts[v] = v;
  } else {
    lay.verts = opts.vertices;
    std::sort(lay.verts.begin(), lay.verts.end());
  }
  const int V = static_cast<int>(lay.verts.size());
  lay.xid.assign(static_cast<std::size_t>(V) * V, -1);
  for (int li = 0; li < V; ++li) {
    for (int lj = 0; lj < V; ++lj) {
      if (opts.kcenter && !std::isfinite(cm.at(lay.verts[li], lay.verts[lj]))) continue;
      lay.xid[static_cast<std::size_t>(li) * V + lj] = static_cast<int>(lay.xs.size());
      lay.xs.push_back({li, lj});
    }
  }
  lay.y_base = static_cast<int>(lay.xs.size());
  return lay;
}

}  // namespace

lp::LinearProgram build_relaxation(const CostMatrix& cm, const Constraints& cons,
                                   const RelaxOptions& opts) {
  VarLayout lay = make_layout(cm, opts);
  const int V = static_cast<int>(lay.verts.size());
  const int k = opts.k_override > 0 ? opts.k_override : cons.k;
  const double p = cons.p;

  lp::LinearProgram prob;
  for (auto& [li, lj] : lay.xs) {
    double c = opts.kcenter ? 0.0 : cm.at(lay.verts[li], lay.verts[lj]);
    prob.add_var(c);  // x_ij, upper bound implied by x <= y <= 1
  }
  for (int li = 0; li < V; ++li) {
    (void)li;
    prob.add_var(0.0, 1.0);  // y_i
  }

  // LP.2: every point receives p fractional centers.
  for (int lj = 0; lj < V; ++lj) {
    std::vector<std::pair<int, double>> row;
    for (int li = 0; li < V; ++li)
      if (int v = lay.x_var(li, lj); v >= 0) row.push_back({v, 1.0});
    prob.add_row(lp::Sense::EQ, p, std::move(row));
  }

  // LP.3: per-center loads within the capacity window whenever open.
  // Unweighted loads are absolute counts against integerized bounds; the
  // weighted form keeps the fractional bounds.
  const double lo = opts.weights ? cons.ell : static_cast<double>(cons.lower_count(cm.n));
  const double hi = opts.weights ? cons.cap_L : static_cast<double>(cons.upper_count(cm.n));
  for (int li = 0; li < V; ++li) {
    std::vector<std::pair<int, double>> low_row, high_row;
    for (int lj = 0; lj < V; ++lj) {
      int v = lay.x_var(li, lj);
      if (v < 0) continue;
      double w = opts.weights ? (*opts.weights)[lay.verts[lj]] : 1.0;
      low_row.push_back({v, w});
      high_row.push_back({v, w});
    }
    low_row.push_back({lay.y_base + li, -lo});
    high_row.push_back({lay.y_base + li, -hi});
    prob.add_row(lp::Sense::GE, 0.0, std::move(low_row));
    prob.add_row(lp::Sense::LE, 0.0, std::move(high_row));
  }

  // LP.4: at most k centers; the k-center probe pins the budget exactly.
  {
    std::vector<std::pair<int, double>> row;
    for (int li = 0; li < V; ++li) row.push_back({lay.y_base + li, 1.0});
    prob.add_row(opts.kcenter ? lp::Sense::EQ : lp::Sense::LE, k, std::move(row));
  }

  // LP.5: no point may lean on a center more than it is open.
  for (int xv = 0; xv < static_cast<int>(lay.xs.size()); ++xv) {
    auto [li, lj] = lay.xs[xv];
    (void)lj;
    prob.add_row(lp::Sense::LE, 0.0, {{xv, 1.0}, {lay.y_base + li, -1.0}});
  }

  return prob;
}

std::optional<FractionalSolution> solve_relaxation(const CostMatrix& cm, const Constraints& cons,
                                                   const RelaxOptions& opts) {
  VarLayout lay = make_layout(cm, opts);
  const int V = static_cast<int>(lay.verts.size());
  lp::LinearProgram prob = build_relaxation(cm, cons, opts);
  lp::LpSolution ls = lp_solve(prob);
  if (ls.status == lp::LpStatus::Infeasible) return std::nullopt;
  ensure(ls.status == lp::LpStatus::Optimal, "lp relaxation: unbounded solve");

  FractionalSolution fs;
  fs.n = cm.n;
  fs.p = cons.p;
  fs.x.assign(static_cast<std::size_t>(cm.n) * cm.n, 0.0);
  fs.y.assign(cm.n, 0.0);
  fs.C.assign(cm.n, 0.0);
  for (int xv = 0; xv < static_cast<int>(lay.xs.size()); ++xv) {
    auto [li, lj] = lay.xs[xv];
    double val = std::clamp(ls.x[xv], 0.0, 1.0);
    if (val < 1e-12) val = 0.0;
    fs.x[static_cast<std::size_t>(lay.verts[li]) * cm.n + lay.verts[lj]] = val;
  }
  for (int li = 0; li < V; ++li) {
    double val = std::clamp(ls.x[lay.y_base + li], 0.0, 1.0);
    if (val < 1e-9) val = 0.0;  // y zero threshold
    fs.y[lay.verts[li]] = val;
    fs.sum_y += val;
  }
  for (int lj = 0; lj < V; ++lj) {
    int j = lay.verts[lj];
    if (opts.kcenter) {
      fs.C[j] = cm.t;
    } else {
      double s = 0.0;
      for (int li = 0; li < V; ++li) s += cm.at(lay.verts[li], j) * fs.xat(lay.verts[li], j);
      fs.C[j] = s / cons.p;
    }
    fs.C_LP += cons.p * fs.C[j];
  }
  check_fractional(fs, cm, cons, opts);
  return fs;
}

std::optional<FractionalSolution> kcenter_lp_feasible(const Instance& inst, double t,
                                                      const Constraints& cons,
                                                      const RelaxOptions& opts) {
  CostMatrix cm = cost_matrix(inst, Objective::KCenter, t);
  RelaxOptions o = opts;
  o.kcenter = true;
  return solve_relaxation(cm, cons, o);
}

void check_fractional(const FractionalSolution& fs, const CostMatrix& cm, const Constraints& cons,
                      const RelaxOptions& opts, double tol) {
  VarLayout lay = make_layout(cm, opts);
  const int k = opts.k_override > 0 ? opts.k_override : cons.k;
  const double lo = opts.weights ? cons.ell : static_cast<double>(cons.lower_count(cm.n));
  const double hi = opts.weights ? cons.cap_L : static_cast<double>(cons.upper_count(cm.n));

  double sum_y = 0.0;
  for (int li = 0; li < static_cast<int>(lay.verts.size()); ++li) {
    int i = lay.verts[li];
    ensure(fs.y[i] >= -tol && fs.y[i] <= 1.0 + 1e-9, "fractional: y outside [0,1]");
    sum_y += fs.y[i];
    double load = 0.0;
    for (int lj = 0; lj < static_cast<int>(lay.verts.size()); ++lj) {
      int j = lay.verts[lj];
      double xi = fs.xat(i, j);
      ensure(xi >= -tol, "fractional: negative x");
      ensure(xi <= fs.y[i] + 1e-9, "fractional: x exceeds y");
      if (opts.kcenter && !std::isfinite(cm.at(i, j)))
        ensure(xi <= 1e-9, "fractional: x assigned over a non-edge");
      load += (opts.weights ? (*opts.weights)[j] : 1.0) * xi;
    }
    ensure(load >= lo * fs.y[i] - tol, "fractional: load below lower capacity");
    ensure(load <= hi * fs.y[i] + tol, "fractional: load above upper capacity");
  }
  if (opts.kcenter)
    ensure(std::abs(sum_y - k) <= tol, "fractional: sum_y differs from k");
  else
    ensure(sum_y <= k + tol, "fractional: sum_y exceeds k");

  for (int lj = 0; lj < static_cast<int>(lay.verts.size()); ++lj) {
    int j = lay.verts[lj];
    double served = 0.0;
    for (int li = 0; li < static_cast<int>(lay.verts.size()); ++li)
      served += fs.xat(lay.verts[li], j);
    ensure(std::abs(served - cons.p) <= tol, "fractional: point demand not met");
  }
}

}  // namespace balcl
