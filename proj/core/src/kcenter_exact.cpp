#include "balcl/kcenter_exact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>

#include "balcl/errors.hpp"
#include "balcl/mincostflow.hpp"

namespace balcl {

namespace {

constexpr double kYTol = 1e-9;    // openings below this are zero
constexpr double kIntTol = 1e-6;  // integrality / conservation tolerance
constexpr double kFloorSlop = 1e-7;

bool contains(const std::vector<int>& sorted_set, int v) {
  return std::binary_search(sorted_set.begin(), sorted_set.end(), v);
}

}  // namespace

ThresholdGraph threshold_graph(const Instance& inst, double t) {
  ThresholdGraph g;
  g.t = t;
  g.n = inst.n;
  g.adj.assign(inst.n, {});
  for (int i = 0; i < inst.n; ++i)
    for (int j = i + 1; j < inst.n; ++j)
      if (inst.distance(i, j) <= t + 1e-12) {
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
      }

  g.comp.assign(inst.n, -1);
  g.hops.assign(static_cast<std::size_t>(inst.n) * inst.n, -1);
  for (int s = 0; s < inst.n; ++s) {
    if (g.comp[s] < 0) {
      int id = g.num_comps++;
      std::queue<int> q;
      q.push(s);
      g.comp[s] = id;
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : g.adj[v])
          if (g.comp[w] < 0) {
            g.comp[w] = id;
            q.push(w);
          }
      }
    }
    // BFS hop distances from s.
    int* row = g.hops.data() + static_cast<std::size_t>(s) * inst.n;
    row[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : g.adj[v])
        if (row[w] < 0) {
          row[w] = row[v] + 1;
          q.push(w);
        }
    }
  }
  return g;
}

MonarchTree build_monarch_tree(const ThresholdGraph& g, const std::vector<int>& verts) {
  require(!verts.empty(), "monarch tree: empty component");
  MonarchTree tree;
  tree.parent.assign(g.n, -1);
  tree.m_of.assign(g.n, -1);
  tree.child_monarchs.assign(g.n, {});
  tree.dependents.assign(g.n, {});
  tree.children.assign(g.n, {});

  std::vector<char> marked(g.n, 0);
  auto crown = [&](int u) {
    tree.monarchs.push_back(u);
    ensure(!marked[u], "monarch tree: new monarch already marked");
    for (int w : g.adj[u]) ensure(!marked[w], "monarch tree: new monarch has a marked neighbor");
    marked[u] = 1;
    tree.m_of[u] = u;
    for (int w : g.adj[u]) {
      marked[w] = 1;
      tree.m_of[w] = u;
    }
  };

  crown(verts[0]);  // root: lowest index in the component
  for (;;) {
    // Lowest-index unmarked vertex at hop distance exactly 2 from the marked
    // set; none exists once every unmarked vertex is adjacent to the set.
    int u = -1, far = 0;
    for (int w : verts) {
      if (marked[w]) continue;
      int dmin = g.n + 1;
      for (int v : verts)
        if (marked[v]) dmin = std::min(dmin, g.hop(w, v));
      if (dmin >= 2) {
        far = 1;
        if (dmin == 2 && u < 0) u = w;
      }
    }
    if (!far) break;
    ensure(u >= 0, "monarch tree: far vertex exists but none at hop 2 (disconnected input?)");
    int v = -1;
    for (int cand : verts)
      if (marked[cand] && g.hop(u, cand) == 2) {
        v = cand;
        break;
      }
    ensure(v >= 0, "monarch tree: no marked vertex at hop 2");
    int parent_monarch = tree.m_of[v];
    ensure(parent_monarch != v, "monarch tree: hop-2 witness is itself a monarch");
    crown(u);
    tree.parent[u] = parent_monarch;
    tree.children[parent_monarch].push_back(u);
    tree.child_monarchs[v].push_back(u);
    ensure(g.hop(u, parent_monarch) == 3, "monarch tree: tree-adjacent monarchs not at hop 3");
  }
  for (int v : verts) {
    if (marked[v]) continue;
    int u = -1;
    for (int cand : verts)
      if (marked[cand] && g.hop(v, cand) == 1) {
        u = cand;
        break;
      }
    ensure(u >= 0, "monarch tree: leftover vertex not adjacent to the marked set");
    tree.dependents[u].push_back(v);
    tree.m_of[v] = tree.m_of[u];
  }

  // Structural guarantees (the five lemma bullets).
  for (int v : verts) ensure(tree.m_of[v] >= 0, "monarch tree: empires do not cover the component");
  for (int u : tree.monarchs) {
    std::vector<int> empire;
    for (int v : verts)
      if (tree.m_of[v] == u) empire.push_back(v);
    std::vector<int> formula = {u};
    for (int j : g.adj[u]) formula.push_back(j);
    std::vector<int> closed = formula;
    for (int j : closed)
      for (int d : tree.dependents[j]) formula.push_back(d);
    std::sort(formula.begin(), formula.end());
    ensure(empire == formula, "monarch tree: empire differs from closed neighborhood + dependents");
    for (int v : empire)
      ensure(g.hop(u, v) <= 2, "monarch tree: empire member beyond hop 2");
  }
  for (int u : tree.monarchs)
    if (tree.parent[u] >= 0)
      ensure(g.hop(u, tree.parent[u]) == 3, "monarch tree: parent edge not hop 3");
  for (int j : verts)
    if (!tree.child_monarchs[j].empty() || !tree.dependents[j].empty()) {
      bool near = false;
      for (int u : tree.monarchs) near = near || g.hop(j, u) == 1;
      ensure(near, "monarch tree: gateway vertex not adjacent to a monarch");
    }
  return tree;
}

namespace {

// Moves delta of opening from -> to: updates y, relocates parcels FIFO, logs
// the elementary move, and checks the distance-5 origin bound on deposit.
void move_mass(YRounding& st, const ThresholdGraph& g, int from, int to, double delta) {
  ensure(delta > 0 && delta <= st.fs.y[from] + 1e-9, "y-rounding: move exceeds donor opening");
  delta = std::min(delta, st.fs.y[from]);
  st.fs.y[from] -= delta;
  if (st.fs.y[from] < 1e-12) st.fs.y[from] = 0.0;
  st.fs.y[to] += delta;
  if (std::abs(st.fs.y[to] - 1.0) < 1e-9) st.fs.y[to] = 1.0;
  ensure(st.fs.y[to] <= 1.0 + 1e-9, "y-rounding: receiver pushed above 1");

  double left = delta;
  auto& src = st.parcels[from];
  while (left > 1e-15 && !src.empty()) {
    Parcel& p = src.front();
    double take = std::min(left, p.amount);
    int hop = g.hop(p.origin, to);
    ensure(hop >= 0 && hop <= 5, "y-rounding: a unit of opening moved more than 5 hops");
    st.parcels[to].push_back({p.origin, take});
    p.amount -= take;
    left -= take;
    if (p.amount < 1e-15) src.erase(src.begin());
  }
  ensure(left <= 1e-9, "y-rounding: parcel bookkeeping lost mass");
  st.elementary.push_back({from, to, delta, g.hop(from, to)});
}

// Paper's LocalRound(V1, V2, V3): fill V1 to 1 by draining V2 \ V1 first and
// V3 \ V1 as a fallback; stops when either V1 is integral or donors run out.
void local_round(YRounding& st, const ThresholdGraph& g, const std::vector<int>& v1,
                 const std::vector<int>& v2, const std::vector<int>& v3, bool at_wstar) {
  for (;;) {
    int recv = -1;
    for (int i : v1)
      if (st.fs.y[i] < 1.0 - kYTol) {
        recv = i;
        break;
      }
    if (recv < 0) break;
    int donor = -1;
    for (int w : v2)
      if (w != recv && !contains(v1, w) && st.fs.y[w] > kYTol) {
        donor = w;
        break;
      }
    if (donor < 0) {
      for (int w : v3)
        if (w != recv && !contains(v1, w) && st.fs.y[w] > kYTol) {
          donor = w;
          break;
        }
      if (donor >= 0 && !at_wstar) st.v3_fallback_outside_wstar = true;
    }
    if (donor < 0) break;
    double delta = std::min(1.0 - st.fs.y[recv], st.fs.y[donor]);
    move_mass(st, g, donor, recv, delta);
  }
}

void round_empire(YRounding& st, const ThresholdGraph& g, const MonarchTree& tree, int u) {
  for (int w : tree.children[u]) round_empire(st, g, tree, w);

  // Phase 1: per monarch-neighbor j, make X_j = {j} u ChildMonarchs(j) u
  // Dependents(j) integral except for a residue parked at j.
  for (int j : g.adj[u]) {
    std::vector<int> xj = {j};
    for (int w : tree.child_monarchs[j]) xj.push_back(w);
    for (int w : tree.dependents[j]) xj.push_back(w);
    std::sort(xj.begin(), xj.end());
    double total = 0.0;
    for (int v : xj) total += st.fs.y[v];
    int m = static_cast<int>(std::floor(total + kFloorSlop));
    ensure(m <= static_cast<int>(xj.size()), "y-rounding: empire mass exceeds member count");
    // floor(y(X_j)) members, avoiding j when possible, lowest index first.
    std::vector<int> wj;
    for (int v : xj)
      if (v != j && static_cast<int>(wj.size()) < m) wj.push_back(v);
    if (static_cast<int>(wj.size()) < m) wj.push_back(j);
    std::sort(wj.begin(), wj.end());
    local_round(st, g, wj, xj, {}, false);
    for (int v : wj) ensure(st.fs.y[v] >= 1.0 - kIntTol, "y-rounding: W_j member left fractional");
    std::vector<int> rest;
    for (int v : xj)
      if (!contains(wj, v)) rest.push_back(v);
    local_round(st, g, {j}, rest, {}, false);
    for (int v : rest)
      if (v != j)
        ensure(st.fs.y[v] <= kIntTol || st.fs.y[v] >= 1.0 - kIntTol,
               "y-rounding: X_j member left fractional after phase 1");
  }

  // Phase 2: concentrate the fractional monarch-neighbors.
  std::vector<int> f;
  for (int j : g.adj[u])
    if (st.fs.y[j] > kIntTol && st.fs.y[j] < 1.0 - kIntTol) f.push_back(j);
  double ftotal = 0.0;
  for (int j : f) ftotal += st.fs.y[j];
  int fm = static_cast<int>(std::floor(ftotal + kFloorSlop));
  std::vector<int> wf(f.begin(), f.begin() + std::min<std::size_t>(fm, f.size()));
  local_round(st, g, wf, f, {}, false);

  // Residual: what is left in F \ W_F moves to a single node, topped up from
  // the monarch itself so the node reaches exactly 1.
  std::vector<int> rest;
  for (int j : f)
    if (!contains(wf, j)) rest.push_back(j);
  double rem = 0.0;
  for (int j : rest) rem += st.fs.y[j];
  if (rem > kIntTol) {
    int wstar = rest.front();
    ensure(st.fs.y[u] >= 1.0 - 1e-9, "y-rounding: monarch lost its opening before the residual");
    local_round(st, g, {wstar}, rest, {u}, true);
    ensure(st.fs.y[wstar] >= 1.0 - kIntTol, "y-rounding: residual node left fractional");
  }
}

}  // namespace

YRounding initial_aggregation(const ThresholdGraph& g, const MonarchTree& tree,
                              const FractionalSolution& frac) {
  YRounding st;
  st.fs = frac;
  st.parcels.assign(g.n, {});
  for (int v = 0; v < g.n; ++v)
    if (st.fs.y[v] > 0) st.parcels[v].push_back({v, st.fs.y[v]});
  for (int u : tree.monarchs) {
    for (int j : g.adj[u]) {
      if (st.fs.y[u] >= 1.0 - kYTol) break;
      double delta = std::min(1.0 - st.fs.y[u], st.fs.y[j]);
      if (delta > 0) move_mass(st, g, j, u, delta);
    }
    ensure(st.fs.y[u] >= 1.0 - kIntTol,
           "initial aggregation: monarch neighborhood holds less than one unit of opening");
    st.fs.y[u] = 1.0;
  }
  return st;
}

ShiftLog round_y(const ThresholdGraph& g, const MonarchTree& tree, YRounding& st) {
  ensure(!tree.monarchs.empty(), "round_y: no monarchs");
  int root = tree.monarchs.front();
  round_empire(st, g, tree, root);
  ensure(st.fs.y[root] >= 1.0 - kIntTol, "round_y: root monarch not opened");

  // Aggregate parcels into net origin -> destination movements.
  std::map<std::pair<int, int>, double> agg;
  for (int v = 0; v < g.n; ++v)
    for (const Parcel& p : st.parcels[v])
      if (p.origin != v && p.amount > 1e-12) agg[{p.origin, v}] += p.amount;
  ShiftLog log;
  for (auto& [key, amt] : agg) {
    int hop = g.hop(key.first, key.second);
    ensure(hop >= 0 && hop <= 5, "round_y: aggregated movement spans more than 5 hops");
    log.push_back({key.first, key.second, amt, hop});
  }
  return log;
}

FractionalSolution realize_shift(const ThresholdGraph& g, const FractionalSolution& lp_frac,
                                 const ShiftLog& shifts, const Constraints& cons,
                                 const std::vector<int>& verts, int k_c) {
  const int n = lp_frac.n;
  std::vector<double> out_frac(g.n, 0.0), in_frac(g.n, 0.0);
  for (const Shift& s : shifts) {
    out_frac[s.from] += s.delta;
    in_frac[s.to] += s.delta;
  }
  FractionalSolution out = lp_frac;
  for (int i : verts) {
    if (out_frac[i] > 0) {
      ensure(out_frac[i] <= lp_frac.y[i] + 1e-9, "realize_shift: vertex over-donates");
      double keep = std::max(0.0, 1.0 - out_frac[i] / lp_frac.y[i]);
      for (int j : verts) out.x[static_cast<std::size_t>(i) * n + j] = lp_frac.xat(i, j) * keep;
    }
    out.y[i] = lp_frac.y[i] - out_frac[i] + in_frac[i];
  }
  for (const Shift& s : shifts) {
    double share = s.delta / lp_frac.y[s.from];
    for (int j : verts)
      out.x[static_cast<std::size_t>(s.to) * n + j] += lp_frac.xat(s.from, j) * share;
  }

  // y' must match the rounded integral openings.
  int open = 0;
  for (int i : verts) {
    ensure(out.y[i] < kIntTol || std::abs(out.y[i] - 1.0) < kIntTol,
           "realize_shift: realized y not integral");
    out.y[i] = out.y[i] < 0.5 ? 0.0 : 1.0;
    open += out.y[i] > 0.5 ? 1 : 0;
  }
  ensure(open == k_c, "realize_shift: open center count differs from the component budget");

  const double lo = cons.lower_count(n);
  const double hi = cons.upper_count(n);
  for (int i : verts) {
    double load = 0.0;
    for (int j : verts) {
      double v = out.xat(i, j);
      ensure(v >= -kIntTol, "realize_shift: negative x");
      ensure(v <= out.y[i] + kIntTol, "realize_shift: x exceeds y");
      if (v > kYTol)
        ensure(g.hop(i, j) >= 0 && g.hop(i, j) <= 6,
               "realize_shift: realized x is not 6-feasible");
      load += v;
    }
    if (out.y[i] < 0.5) {
      ensure(load <= kIntTol, "realize_shift: closed center still carries load");
      for (int j : verts) out.x[static_cast<std::size_t>(i) * n + j] = 0.0;
    } else {
      ensure(load >= lo - kIntTol && load <= hi + kIntTol,
             "realize_shift: realized load outside the capacity window");
    }
  }
  for (int j : verts) {
    double served = 0.0;
    for (int i : verts) served += out.xat(i, j);
    ensure(std::abs(served - cons.p) <= kIntTol, "realize_shift: point demand broken");
  }
  return out;
}

void round_x_kcenter(const ThresholdGraph& g, const FractionalSolution& fs,
                     const Constraints& cons, const std::vector<int>& verts, Assignment& out) {
  const int n = fs.n;
  const long long lo = cons.lower_count(n);
  const long long hi = cons.upper_count(n);
  std::vector<int> centers;
  for (int i : verts)
    if (fs.y[i] > 0.5) centers.push_back(i);
  const long long nc = static_cast<long long>(verts.size());
  const long long kc = static_cast<long long>(centers.size());

  FlowNetwork net;
  int s = net.add_node();
  int t = net.add_node();
  std::vector<int> client_node(g.n, -1), center_node(g.n, -1);
  for (int j : verts) client_node[j] = net.add_node();
  for (int i : centers) center_node[i] = net.add_node();

  net.add_supply(s, nc * cons.p);
  net.add_supply(t, -(nc * cons.p - kc * lo));
  std::vector<std::pair<std::pair<int, int>, int>> xedges;  // ((center, client), edge id)
  for (int j : verts) {
    net.add_edge(s, client_node[j], cons.p, -1.0);
    for (int i : centers)
      if (fs.xat(i, j) > kYTol)
        xedges.push_back({{i, j}, net.add_edge(client_node[j], center_node[i], 1, 0.0)});
  }
  for (int i : centers) {
    net.add_supply(center_node[i], -lo);
    net.add_edge(center_node[i], t, hi - lo, 0.0);
  }

  auto flow = solve_mcf(net);
  ensure(flow.has_value(),
         "x-rounding: integral flow infeasible despite a feasible fractional solution");

  std::vector<long long> load(g.n, 0);
  std::vector<int> got(g.n, 0);
  for (auto& [pair, eid] : xedges)
    if (flow->flow[eid] == 1) {
      auto [i, j] = pair;
      out.assign[j].push_back({i, 1});
      ensure(g.hop(i, j) >= 0 && g.hop(i, j) <= 6, "x-rounding: assignment beyond 6 hops");
      ++load[i];
      ++got[j];
    }
  for (int j : verts) ensure(got[j] == cons.p, "x-rounding: point lacks p distinct centers");
  for (int i : centers)
    ensure(load[i] >= lo && load[i] <= hi, "x-rounding: center load outside capacity bounds");
  out.centers.insert(out.centers.end(), centers.begin(), centers.end());
}

KRange feasible_k_range(const Instance& inst, const ThresholdGraph& g,
                        const std::vector<int>& verts, const Constraints& cons) {
  KRange r;
  r.probes.assign(cons.k + 1, std::nullopt);
  CostMatrix cm = cost_matrix(inst, Objective::KCenter, g.t);
  for (int kp = 1; kp <= cons.k; ++kp) {
    // p distinct fractional centers per point and sum(y) = k' both need
    // p <= k' <= |component| (y <= 1); skip the LP when impossible.
    if (kp < cons.p || kp > static_cast<int>(verts.size())) continue;
    RelaxOptions opts;
    opts.kcenter = true;
    opts.vertices = verts;
    opts.k_override = kp;
    r.probes[kp] = solve_relaxation(cm, cons, opts);
  }
  int first = -1, last = -1;
  for (int kp = 1; kp <= cons.k; ++kp)
    if (r.probes[kp].has_value()) {
      if (first < 0) first = kp;
      last = kp;
    }
  if (first < 0) return r;  // empty range
  for (int kp = first; kp <= last; ++kp)
    ensure(r.probes[kp].has_value(), "feasible_k_range: feasible budgets are not contiguous");
  r.m = first;
  r.M = last;
  return r;
}

std::optional<KCenterResult> kcenter_cluster(const Instance& inst, const Constraints& cons) {
  cons.validate(inst.n);
  const std::vector<double> thresholds = inst.distinct_distances();
  for (int ti = 0; ti < static_cast<int>(thresholds.size()); ++ti) {
    ThresholdGraph g = threshold_graph(inst, thresholds[ti]);
    if (static_cast<long long>(g.num_comps) * std::max(1, cons.p) > cons.k) continue;

    std::vector<std::vector<int>> comp_verts(g.num_comps);
    for (int v = 0; v < inst.n; ++v) comp_verts[g.comp[v]].push_back(v);

    std::vector<KRange> ranges;
    ranges.reserve(g.num_comps);
    bool ok = true;
    long long msum = 0, cap_sum = 0;
    for (int c = 0; c < g.num_comps && ok; ++c) {
      ranges.push_back(feasible_k_range(inst, g, comp_verts[c], cons));
      if (ranges.back().empty()) ok = false;
      msum += ranges.back().m;
      cap_sum += ranges.back().M;
    }
    if (!ok || msum > cons.k || cap_sum < cons.k) continue;

    // Allocate budgets: start at the minimum, then raise components in index
    // order until the global budget is spent.
    std::vector<int> kc(g.num_comps);
    long long deficit = cons.k - msum;
    for (int c = 0; c < g.num_comps; ++c) {
      kc[c] = ranges[c].m;
      int inc = static_cast<int>(std::min<long long>(deficit, ranges[c].M - ranges[c].m));
      kc[c] += inc;
      deficit -= inc;
    }
    ensure(deficit == 0, "kcenter: budget allocation failed despite range checks");

    KCenterResult res;
    res.t_star = thresholds[ti];
    res.diag.threshold_index = ti;
    res.diag.num_components = g.num_comps;
    res.diag.component_k = kc;
    res.assignment.assign.resize(inst.n);

    for (int c = 0; c < g.num_comps; ++c) {
      const FractionalSolution& frac = *ranges[c].probes[kc[c]];
      MonarchTree tree = build_monarch_tree(g, comp_verts[c]);
      YRounding st = initial_aggregation(g, tree, frac);
      ShiftLog shifts = round_y(g, tree, st);
      FractionalSolution realized =
          realize_shift(g, frac, shifts, cons, comp_verts[c], kc[c]);
      round_x_kcenter(g, realized, cons, comp_verts[c], res.assignment);
      res.diag.num_shifts += static_cast<int>(shifts.size());
      for (const Shift& sft : shifts) res.diag.max_hop = std::max(res.diag.max_hop, sft.hops);
      res.diag.v3_fallback_outside_wstar |= st.v3_fallback_outside_wstar;
    }
    std::sort(res.assignment.centers.begin(), res.assignment.centers.end());
    for (auto& slots : res.assignment.assign)
      std::sort(slots.begin(), slots.end());
    for (int j = 0; j < inst.n; ++j)
      for (auto& [i, m] : res.assignment.assign[j]) {
        (void)m;
        res.diag.max_assigned_distance =
            std::max(res.diag.max_assigned_distance, inst.distance(i, j));
      }
    ensure(res.diag.max_assigned_distance <= 6.0 * res.t_star + 1e-9,
           "kcenter: assignment exceeds 6 * t*");
    return res;
  }
  return std::nullopt;
}

}  // namespace balcl
