#include "balcl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numeric>

#include "balcl/baselines.hpp"
#include "balcl/errors.hpp"
#include "balcl/rng.hpp"
#include "balcl/threadpool.hpp"

namespace balcl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double dot(const std::vector<double>& w, const double* x, int dim) {
  double s = w[dim];  // bias
  for (int t = 0; t < dim; ++t) s += w[t] * x[t];
  return s;
}

// lambda/2 * |w|^2 (bias excluded) + mean squared hinge.
double svm_objective(const std::vector<double>& w, const std::vector<const double*>& pts,
                     const std::vector<signed char>& y, int dim, double lambda) {
  double reg = 0.0;
  for (int t = 0; t < dim; ++t) reg += w[t] * w[t];
  double loss = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    double m = 1.0 - y[j] * dot(w, pts[j], dim);
    if (m > 0.0) loss += m * m;
  }
  return 0.5 * lambda * reg + loss / static_cast<double>(pts.size());
}

// One binary problem: minimize the objective above by full-batch gradient
// descent with Armijo backtracking; guaranteed non-increasing.
std::vector<double> train_binary(const std::vector<const double*>& pts,
                                 const std::vector<signed char>& y, int dim, double lambda,
                                 int epochs, double step0) {
  const int m = static_cast<int>(pts.size());
  std::vector<double> w(dim + 1, 0.0), g(dim + 1), cand(dim + 1);
  double f = svm_objective(w, pts, y, dim, lambda);
  for (int ep = 0; ep < epochs; ++ep) {
    for (int t = 0; t < dim; ++t) g[t] = lambda * w[t];
    g[dim] = 0.0;  // bias unregularized
    for (int j = 0; j < m; ++j) {
      double mj = 1.0 - y[j] * dot(w, pts[j], dim);
      if (mj <= 0.0) continue;
      double coef = -2.0 * mj * y[j] / m;
      const double* x = pts[j];
      for (int t = 0; t < dim; ++t) g[t] += coef * x[t];
      g[dim] += coef;
    }
    double gnorm2 = 0.0;
    for (double v : g) gnorm2 += v * v;
    if (gnorm2 < 1e-18) break;
    double eta = step0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      for (int t = 0; t <= dim; ++t) cand[t] = w[t] - eta * g[t];
      double fc = svm_objective(cand, pts, y, dim, lambda);
      if (fc <= f - 1e-4 * eta * gnorm2) {
        ensure(fc <= f + 1e-9 * std::max(1.0, std::fabs(f)),
               "train_local: objective increased within an epoch");
        w.swap(cand);
        accepted = true;
        if (f - fc < 1e-12 * std::max(1.0, f)) ep = epochs;  // converged
        f = fc;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // step underflow: gradient is numerically zero
  }
  return w;
}

int majority_label(const std::vector<int>& labels) {
  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  int best = 0, best_count = -1;
  for (const auto& [label, count] : counts)
    if (count > best_count) best = label, best_count = count;  // first = lowest label on ties
  return best;
}

LinearModel fit_model(const std::vector<const double*>& pts, const std::vector<int>& labels,
                      int dim, double lambda, int epochs, double step0, int fallback_label) {
  LinearModel model;
  if (pts.empty()) {
    model.is_constant = true;
    model.constant = fallback_label;
    return model;
  }
  model.classes.assign(labels.begin(), labels.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                      model.classes.end());
  if (model.classes.size() == 1) {
    model.is_constant = true;
    model.constant = model.classes[0];
    return model;
  }
  model.w.reserve(model.classes.size());
  std::vector<signed char> y(pts.size());
  for (int cls : model.classes) {
    for (std::size_t j = 0; j < pts.size(); ++j) y[j] = labels[j] == cls ? 1 : -1;
    model.w.push_back(train_binary(pts, y, dim, lambda, epochs, step0));
  }
  return model;
}

// Mean validation accuracy of round-robin 3-fold CV at one lambda.
double cv_accuracy(const std::vector<const double*>& pts, const std::vector<int>& labels, int dim,
                   double lambda, int epochs, double step0, int fallback_label) {
  int correct = 0, total = 0;
  for (int fold = 0; fold < 3; ++fold) {
    std::vector<const double*> tr_pts, va_pts;
    std::vector<int> tr_lab, va_lab;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (static_cast<int>(j % 3) == fold) {
        va_pts.push_back(pts[j]);
        va_lab.push_back(labels[j]);
      } else {
        tr_pts.push_back(pts[j]);
        tr_lab.push_back(labels[j]);
      }
    }
    LinearModel m = fit_model(tr_pts, tr_lab, dim, lambda, epochs, step0, fallback_label);
    for (std::size_t j = 0; j < va_pts.size(); ++j) {
      correct += m.predict(va_pts[j], dim) == va_lab[j] ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

// Mirrors class_entropy: H = -(1/k) sum_c sum_y p_cy log2 p_cy over the train
// partitions; empty partitions contribute 0 but count in k.
double partition_entropy(const std::vector<std::vector<int>>& members,
                         const std::vector<int>& labels, int k) {
  double h = 0.0;
  for (const std::vector<int>& part : members) {
    if (part.empty()) continue;
    std::map<int, int> counts;
    for (int j : part) ++counts[labels[j]];
    for (const auto& [label, count] : counts) {
      double p = static_cast<double>(count) / part.size();
      h -= p * std::log2(p);
    }
  }
  return h / k;
}

std::unique_ptr<Dispatcher> make_dispatcher(const Instance& train, const std::vector<int>& sub,
                                            const std::vector<int>& second,
                                            const ExperimentConfig& cfg, Rng& rng) {
  const int dim = train.dim;
  if (cfg.dispatcher == "random") return random_dispatcher(cfg.k, dim, rng);

  PointSet S;
  S.n = static_cast<int>(sub.size());
  S.dim = dim;
  S.data.reserve(static_cast<std::size_t>(S.n) * dim);
  for (int i : sub)
    S.data.insert(S.data.end(), train.point(i), train.point(i) + dim);

  if (cfg.dispatcher == "bpt") return bpt_dispatcher(S, cfg.k, rng);
  if (cfg.dispatcher == "lsh") return lsh_dispatcher(S, cfg.k, rng);

  PointSet S2;
  S2.n = static_cast<int>(second.size());
  S2.dim = dim;
  S2.data.reserve(static_cast<std::size_t>(S2.n) * dim);
  for (int i : second)
    S2.data.insert(S2.data.end(), train.point(i), train.point(i) + dim);

  Constraints cons;
  cons.k = cfg.k;
  cons.p = 1;
  cons.ell = cfg.ell >= 0.0 ? cfg.ell : 0.5 / cfg.k;
  cons.cap_L = cfg.cap_L > 0.0 ? cfg.cap_L : std::min(1.0, 2.0 / cfg.k);
  FitOptions opts;
  opts.seeding.seed = rng();
  if (cfg.dispatcher == "kmeanspp") {
    opts.algo = FitAlgo::KMeansPP;
  } else if (cfg.dispatcher == "oracle") {
    opts.algo = FitAlgo::Oracle;
  } else {
    require(false, "harness: unknown dispatcher '" + cfg.dispatcher +
                       "' (expected kmeanspp|oracle|random|bpt|lsh)");
  }
  return fit_dispatcher(S, S2, cons, opts, rng);
}

}  // namespace

int LinearModel::predict(const double* x, int dim) const {
  if (is_constant || classes.empty()) return constant;
  int best = 0;
  double best_score = dot(w[0], x, dim);
  for (std::size_t c = 1; c < classes.size(); ++c) {
    double s = dot(w[c], x, dim);
    if (s > best_score) {  // ties keep the lowest class label
      best_score = s;
      best = static_cast<int>(c);
    }
  }
  return classes[best];
}

bool imbalance_guard(const std::vector<long long>& sizes, int k) {
  require(k >= 1 && static_cast<int>(sizes.size()) == k, "imbalance_guard: need one size per cluster");
  if (k == 1) return false;
  long long total = std::accumulate(sizes.begin(), sizes.end(), 0LL);
  if (total == 0) return false;
  std::vector<long long> sorted = sizes;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  long long top = std::accumulate(sorted.begin(), sorted.begin() + (k + 1) / 2, 0LL);
  return static_cast<double>(top) > 0.98 * static_cast<double>(total);
}

LinearModel train_local(const std::vector<const double*>& points, const std::vector<int>& labels,
                        int dim, double lambda, int epochs, double step0, int fallback_label) {
  require(points.size() == labels.size(), "train_local: points/labels size mismatch");
  require(dim >= 1 && epochs >= 1 && step0 > 0.0, "train_local: bad hyperparameters");
  if (lambda < 0.0) {
    if (points.size() < 3) {
      lambda = 0.1;
    } else {
      const double grid[] = {1e-3, 1e-1, 10.0};
      double best_acc = -1.0;
      for (double cand : grid) {
        double acc = cv_accuracy(points, labels, dim, cand, epochs, step0, fallback_label);
        if (acc > best_acc) {  // strict: ties keep the smallest lambda
          best_acc = acc;
          lambda = cand;
        }
      }
    }
  }
  return fit_model(points, labels, dim, lambda, epochs, step0, fallback_label);
}

ExperimentResult run_experiment(const Instance& train, const Instance& test,
                                const ExperimentConfig& cfg) {
  require(train.has_points() && test.has_points(), "run_experiment: needs point-form data");
  require(train.has_labels() && test.has_labels(), "run_experiment: needs labeled data");
  require(train.dim == test.dim, "run_experiment: train/test dimension mismatch");
  require(cfg.k >= 1, "run_experiment: k must be >= 1");
  require(cfg.workers >= 1, "run_experiment: worker count must be >= 1");
  require(cfg.repeats >= 1, "run_experiment: repeats must be >= 1");
  require(cfg.dispatcher != "lp-round",
          "run_experiment: lp-round replicates points (p >= 2); the harness needs p = 1");

  ExperimentResult res;
  ThreadPool pool(cfg.workers);
  double acc_sum = 0.0;
  const auto t_all = Clock::now();

  for (int rep = 0; rep < cfg.repeats; ++rep) {
    // Fit the dispatcher on a fresh subsample.
    auto t0 = Clock::now();
    Rng sub_rng = subrng(cfg.seed, 100 + rep);
    int want = std::min(std::max(1, cfg.subsample), train.n);
    std::vector<int> all(train.n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> sub;
    std::sample(all.begin(), all.end(), std::back_inserter(sub), want, sub_rng);

    Rng second_rng = subrng(cfg.seed, 200 + rep);
    int want2 = cfg.second_sample > 0 ? cfg.second_sample : want;
    std::vector<int> second(want2);
    for (int& v : second) v = static_cast<int>(second_rng() % train.n);

    Rng fit_rng = subrng(cfg.seed, 300 + rep);
    std::unique_ptr<Dispatcher> disp = make_dispatcher(train, sub, second, cfg, fit_rng);
    ensure(disp->p() == 1, "run_experiment: dispatcher replication must be 1");
    ensure(disp->k() == cfg.k, "run_experiment: dispatcher k mismatch");
    res.timings.fit += seconds_since(t0);

    // Dispatch the training set.
    t0 = Clock::now();
    std::vector<int> part_of(train.n);
    parallel_for(pool, train.n,
                 [&](int i) { part_of[i] = disp->route(train.point(i)).at(0); });
    std::vector<std::vector<int>> members(cfg.k);
    for (int i = 0; i < train.n; ++i) {
      ensure(part_of[i] >= 0 && part_of[i] < cfg.k, "run_experiment: route out of range");
      members[part_of[i]].push_back(i);
    }
    res.timings.dispatch_train += seconds_since(t0);

    std::vector<long long> sizes(cfg.k);
    for (int c = 0; c < cfg.k; ++c) sizes[c] = static_cast<long long>(members[c].size());
    long long routed = std::accumulate(sizes.begin(), sizes.end(), 0LL);
    ensure(routed == train.n, "run_experiment: dispatched mass != train size");
    res.cluster_sizes = sizes;
    res.entropy = partition_entropy(members, train.labels, cfg.k);

    if (imbalance_guard(sizes, cfg.k)) {  // accuracy omitted for this repeat
      res.guard_tripped = true;
      continue;
    }

    // Train one model per partition, in parallel, merged by partition index.
    t0 = Clock::now();
    const int global_majority = majority_label(train.labels);
    std::vector<LinearModel> models(cfg.k);
    parallel_for(pool, cfg.k, [&](int c) {
      std::vector<const double*> pts;
      std::vector<int> labs;
      pts.reserve(members[c].size());
      labs.reserve(members[c].size());
      for (int i : members[c]) {
        pts.push_back(train.point(i));
        labs.push_back(train.labels[i]);
      }
      models[c] =
          train_local(pts, labs, train.dim, cfg.lambda, cfg.epochs, cfg.step0, global_majority);
    });
    res.timings.train += seconds_since(t0);

    // Dispatch the test set.
    t0 = Clock::now();
    std::vector<int> test_part(test.n);
    parallel_for(pool, test.n,
                 [&](int i) { test_part[i] = disp->route(test.point(i)).at(0); });
    res.timings.dispatch_test += seconds_since(t0);

    // Predict with each point's local model.
    t0 = Clock::now();
    std::vector<signed char> correct(test.n);
    parallel_for(pool, test.n, [&](int i) {
      int pred = models[test_part[i]].predict(test.point(i), test.dim);
      correct[i] = pred == test.labels[i] ? 1 : 0;
    });
    long long hits = 0;
    for (int i = 0; i < test.n; ++i) hits += correct[i];
    res.timings.predict += seconds_since(t0);

    acc_sum += static_cast<double>(hits) / test.n;
    ++res.repeats_used;
  }

  res.timings.total = seconds_since(t_all);
  if (res.repeats_used > 0) {
    res.accuracy = acc_sum / res.repeats_used;
    ensure(res.accuracy >= 0.0 && res.accuracy <= 1.0, "run_experiment: accuracy outside [0,1]");
  }
  return res;
}

ScalingReport scaling_run(const Instance& train, const Instance& test, const ExperimentConfig& cfg,
                          const std::vector<int>& worker_counts) {
  require(!worker_counts.empty(), "scaling_run: need at least one worker count");
  ScalingReport report;
  report.worker_counts = worker_counts;
  for (int count : worker_counts) {
    require(count >= 1, "scaling_run: worker counts must be >= 1");
    ExperimentConfig local = cfg;
    local.workers = count;
    report.timings.push_back(run_experiment(train, test, local).timings);
  }
  for (const PhaseTimings& t : report.timings)
    report.speedup.push_back(report.timings.front().total / std::max(t.total, 1e-12));
  return report;
}

}  // namespace balcl
