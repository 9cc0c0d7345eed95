#include "balcl/cost.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "balcl/errors.hpp"

namespace balcl {

CostMatrix cost_matrix(const Instance& inst, Objective obj, double t) {
  CostMatrix cm;
  cm.objective = obj;
  cm.n = inst.n;
  cm.t = t;
  cm.c.resize(static_cast<std::size_t>(inst.n) * inst.n);
  for (int i = 0; i < inst.n; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      double v;
      switch (obj) {
        case Objective::KMedian: v = inst.distance(i, j); break;
        case Objective::KMeans: v = inst.distance_sq(i, j); break;
        case Objective::KCenter: v = inst.distance(i, j) <= t + 1e-12 ? t : kInf; break;
        default: v = 0.0; break;
      }
      cm.c[static_cast<std::size_t>(i) * inst.n + j] = v;
    }
  }
  return cm;
}

double evaluate(const Instance& inst, const Assignment& a, Objective obj) {
  ensure(a.n() == inst.n, "evaluate: assignment size mismatch");
  double total = 0.0;
  double worst = 0.0;
  for (int j = 0; j < inst.n; ++j) {
    for (auto& [i, m] : a.assign[j]) {
      ensure(m >= 1, "evaluate: nonpositive multiplicity");
      switch (obj) {
        case Objective::KMedian: total += m * inst.distance(i, j); break;
        case Objective::KMeans: total += m * inst.distance_sq(i, j); break;
        case Objective::KCenter: worst = std::max(worst, inst.distance(i, j)); break;
      }
    }
  }
  return obj == Objective::KCenter ? worst : total;
}

ViolationReport check_capacities(const Assignment& a, const Constraints& cons,
                                 const std::vector<double>* weights) {
  const int n = a.n();
  ViolationReport rep;
  rep.loads.assign(a.centers.size(), 0.0);
  rep.counts.assign(a.centers.size(), 0);
  std::map<int, int> center_pos;
  for (int c = 0; c < static_cast<int>(a.centers.size()); ++c) center_pos[a.centers[c]] = c;
  for (int j = 0; j < n; ++j) {
    double w = weights ? (*weights)[j] : 1.0 / n;
    for (auto& [i, m] : a.assign[j]) {
      auto it = center_pos.find(i);
      ensure(it != center_pos.end(), "check_capacities: assignment uses unlisted center");
      rep.loads[it->second] += w * m;
      rep.counts[it->second] += m;
      rep.worst_multiplicity = std::max(rep.worst_multiplicity, m);
    }
  }
  for (double load : rep.loads) {
    if (cons.cap_L > 0) rep.max_upper_factor = std::max(rep.max_upper_factor, load / cons.cap_L);
    if (cons.ell > 0)
      rep.max_lower_factor =
          std::max(rep.max_lower_factor, load > 0 ? cons.ell / load : kInf);
  }
  return rep;
}

double averaged_kmeans_objective(const Instance& inst, const Assignment& a) {
  ensure(a.n() == inst.n, "averaged objective: assignment size mismatch");
  double total = 0.0;
  for (int j = 0; j < inst.n; ++j) {
    int slots = a.slots(j);
    if (slots == 0) continue;
    double s = 0.0;
    for (auto& [i, m] : a.assign[j]) s += m * inst.distance_sq(i, j);
    total += s / slots;
  }
  return total;
}

double class_entropy(const Assignment& a, const std::vector<int>& labels) {
  ensure(labels.size() == static_cast<std::size_t>(a.n()), "entropy: label count mismatch");
  const int k = static_cast<int>(a.centers.size());
  ensure(k >= 1, "entropy: no clusters");
  std::map<int, int> center_pos;
  for (int c = 0; c < k; ++c) center_pos[a.centers[c]] = c;
  // cluster -> label -> member count (a point counts once per cluster it touches)
  std::vector<std::map<int, long long>> hist(k);
  std::vector<long long> sizes(k, 0);
  for (int j = 0; j < a.n(); ++j) {
    for (auto& [i, m] : a.assign[j]) {
      (void)m;
      int c = center_pos.at(i);
      ++hist[c][labels[j]];
      ++sizes[c];
    }
  }
  double h = 0.0;
  for (int c = 0; c < k; ++c) {
    if (sizes[c] == 0) continue;
    for (auto& [label, cnt] : hist[c]) {
      (void)label;
      double pr = static_cast<double>(cnt) / sizes[c];
      h -= pr * std::log2(pr);
    }
  }
  return h / k;
}

}  // namespace balcl
