// balcl: balanced clustering and dispatch from the command line.
//
// Subcommands: gen, cluster, oracle, dispatch {fit,route}, simulate,
// validate. Exit codes: 0 success, 1 usage or bad input, 2 infeasible
// problem (including non-metric input to validate), 3 internal invariant
// failure. Every output document embeds the effective configuration; CSV
// outputs carry it in a sidecar <out>.meta.json.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "balcl/baselines.hpp"
#include "balcl/bicriteria.hpp"
#include "balcl/cost.hpp"
#include "balcl/dispatch.hpp"
#include "balcl/errors.hpp"
#include "balcl/harness.hpp"
#include "balcl/instance.hpp"
#include "balcl/instances.hpp"
#include "balcl/io.hpp"
#include "balcl/kcenter_exact.hpp"
#include "balcl/kmeanspp.hpp"
#include "balcl/lp_relax.hpp"
#include "balcl/rng.hpp"
#include "balcl/stability.hpp"

namespace {

using balcl::ensure;
using balcl::require;
using nlohmann::json;

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out;
  std::string format;  // empty -> per-subcommand default
  std::string log_level = "info";
  int threads = 0;  // 0 -> uncapped
  bool seed_given = false;
};

void log_info(const GlobalOpts& g, const std::string& msg) {
  if (g.log_level != "quiet") std::cerr << "[balcl] " << msg << "\n";
}

[[maybe_unused]] void log_debug(const GlobalOpts& g, const std::string& msg) {
  if (g.log_level == "debug") std::cerr << "[balcl] " << msg << "\n";
}

std::string resolve_format(const GlobalOpts& g, const std::string& dflt) {
  return g.format.empty() ? dflt : g.format;
}

json global_config(const GlobalOpts& g, const std::string& command) {
  return json{{"command", command},
              {"seed", g.seed},
              {"log_level", g.log_level},
              {"threads", g.threads}};
}

void write_sidecar(const std::string& out_path, const json& config) {
  balcl::write_json(out_path + ".meta.json", json{{"config", config}});
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  require(os.good(), "cannot open output file: " + path);
  os << body;
  require(os.good(), "failed writing output file: " + path);
}

json violations_to_json(const balcl::ViolationReport& r) {
  return json{{"loads", r.loads},
              {"counts", r.counts},
              {"max_upper_factor", r.max_upper_factor},
              {"max_lower_factor", r.max_lower_factor},
              {"worst_multiplicity", r.worst_multiplicity},
              {"feasible", r.feasible()}};
}

std::string assignment_csv(const balcl::Assignment& a) {
  std::string body = "point,center,mult\n";
  for (int j = 0; j < a.n(); ++j)
    for (const auto& [c, m] : a.assign[j])
      body += std::to_string(j) + "," + std::to_string(c) + "," + std::to_string(m) + "\n";
  return body;
}

// Writes an assignment result in the requested format, echoing the config.
void emit_assignment(const GlobalOpts& g, const json& config, const balcl::Assignment& a,
                     balcl::Objective obj, double value, const balcl::ViolationReport& report,
                     const json& extra) {
  require(!g.out.empty(), "missing --out for the result document");
  std::string fmt = resolve_format(g, "json");
  if (fmt == "json") {
    json doc = balcl::assignment_to_json(a, obj, value, report);
    doc["config"] = config;
    if (!extra.empty()) doc["diagnostics"] = extra;
    balcl::write_json(g.out, doc);
  } else {
    write_text(g.out, assignment_csv(a));
    json meta = config;
    meta["value"] = value;
    meta["objective"] = balcl::objective_name(obj);
    meta["violations"] = violations_to_json(report);
    if (!extra.empty()) meta["diagnostics"] = extra;
    write_sidecar(g.out, meta);
  }
  log_info(g, "wrote " + g.out + " (value " + std::to_string(value) + ")");
}

// Per-cluster representative: the member minimizing the summed distance
// (k-median / k-means) or the maximum distance (k-center); ties lowest.
balcl::Assignment clusters_to_assignment(const balcl::Instance& inst,
                                         const std::vector<std::vector<int>>& clusters,
                                         balcl::Objective obj) {
  balcl::Assignment a;
  a.assign.resize(inst.n);
  for (const std::vector<int>& cl : clusters) {
    require(!cl.empty(), "clusters_to_assignment: empty cluster");
    int best = cl.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (int cand : cl) {
      double score = 0.0;
      for (int j : cl) {
        double d = inst.distance(cand, j);
        if (obj == balcl::Objective::KCenter)
          score = std::max(score, d);
        else
          score += obj == balcl::Objective::KMeans ? d * d : d;
      }
      if (score < best_score - 1e-15) {
        best_score = score;
        best = cand;
      }
    }
    a.centers.push_back(best);
    for (int j : cl) a.assign[j] = {{best, 1}};
  }
  std::sort(a.centers.begin(), a.centers.end());
  return a;
}

std::string dump_lp_text(const balcl::lp::LinearProgram& prob) {
  std::string s = "minimize\n";
  for (int v = 0; v < prob.num_vars; ++v) {
    s += "  x" + std::to_string(v) + ": cost " + std::to_string(prob.objective[v]);
    if (std::isfinite(prob.upper[v])) s += ", upper " + std::to_string(prob.upper[v]);
    s += "\n";
  }
  s += "subject to\n";
  int r = 0;
  for (const auto& row : prob.rows) {
    s += "  r" + std::to_string(r++) + ":";
    for (const auto& [v, coef] : row.coeffs)
      s += " " + std::to_string(coef) + "*x" + std::to_string(v);
    s += row.sense == balcl::lp::Sense::LE   ? " <= "
         : row.sense == balcl::lp::Sense::GE ? " >= "
                                             : " == ";
    s += std::to_string(row.rhs) + "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
  std::string name;
  int nl = 3;
  int k_prime = 3;
  bool perturb = false;
  int components = 20;
  int dims = -1;  // -1 -> per-generator default
  double sigma = 0.05;
  int n = -1;     // -1 -> per-generator default
  int n_labels = 0;
};

int run_gen(const GlobalOpts& g, const GenOpts& o) {
  require(!g.out.empty(), "gen: missing --out");
  balcl::Rng rng = balcl::make_rng(g.seed);
  balcl::Instance inst;
  json cfg = global_config(g, "gen");
  cfg["generator"] = o.name;
  if (o.name == "star") {
    inst = balcl::gen_star(o.nl);
    cfg["nl"] = o.nl;
  } else if (o.name == "groups") {
    inst = balcl::gen_groups(o.k_prime, o.nl, o.perturb);
    cfg["k_prime"] = o.k_prime;
    cfg["nl"] = o.nl;
    cfg["perturb"] = o.perturb;
  } else if (o.name == "gmm") {
    int n = o.n < 0 ? 2000 : o.n;
    int dims = o.dims < 0 ? 10 : o.dims;
    inst = balcl::gen_gaussian_mixture(o.components, dims, o.sigma, n, rng, o.n_labels);
    cfg["components"] = o.components;
    cfg["dims"] = dims;
    cfg["sigma"] = o.sigma;
    cfg["n"] = n;
    cfg["n_labels"] = o.n_labels;
  } else if (o.name == "grid") {
    int n = o.n < 0 ? 4000 : o.n;
    int dims = o.dims < 0 ? 100 : o.dims;
    inst = balcl::gen_grid_rect(n, rng, dims);
    cfg["n"] = n;
    cfg["dims"] = dims;
  } else if (o.name == "twogauss") {
    int n = o.n < 0 ? 2000 : o.n;
    inst = balcl::gen_two_gaussians(n, rng);
    cfg["n"] = n;
  } else {
    require(false, "gen: unknown generator '" + o.name + "'");
  }
  if (inst.has_matrix())
    balcl::write_matrix_csv(g.out, inst);
  else
    balcl::write_points_csv(g.out, inst);
  cfg["n_points"] = inst.n;
  cfg["form"] = inst.has_matrix() ? "matrix" : "points";
  for (const auto& [key, value] : inst.meta) cfg["suggested_" + key] = value;
  write_sidecar(g.out, cfg);
  log_info(g, "generated " + std::to_string(inst.n) + " points -> " + g.out);
  return 0;
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterOpts {
  std::string in;
  std::string algo;
  std::string objective;  // empty -> per-algo default
  int k = 1;
  int p = 1;
  double ell = 0.0;
  double cap_l = 1.0;
  int oversample = -1;
  int lloyd_iters = 10;
  std::string dump_lp;
};

int run_cluster(const GlobalOpts& g, const ClusterOpts& o) {
  balcl::Instance inst = balcl::read_instance_csv(o.in);
  balcl::Constraints cons{o.k, o.p, o.ell, o.cap_l};
  json cfg = global_config(g, "cluster");
  cfg["in"] = o.in;
  cfg["algo"] = o.algo;
  cfg["k"] = o.k;
  cfg["p"] = o.p;
  cfg["ell"] = o.ell;
  cfg["cap_L"] = o.cap_l;

  if (o.algo == "lp-round") {
    balcl::Objective obj = balcl::parse_objective(o.objective.empty() ? "kmedian" : o.objective);
    cfg["objective"] = balcl::objective_name(obj);
    auto res = balcl::bicriteria_cluster(inst, cons, obj);
    if (!res) throw balcl::InfeasibleError("cluster: the LP relaxation is infeasible");
    if (!o.dump_lp.empty()) {
      balcl::CostMatrix cm = balcl::cost_matrix(inst, obj, res->diag.threshold);
      balcl::RelaxOptions ropts;
      ropts.kcenter = obj == balcl::Objective::KCenter;
      write_text(o.dump_lp, dump_lp_text(balcl::build_relaxation(cm, cons, ropts)));
      log_info(g, "dumped LP to " + o.dump_lp);
    }
    json extra{{"c_lp", res->diag.c_lp},
               {"sum_y", res->diag.sum_y},
               {"threshold", res->diag.threshold},
               {"num_open", res->diag.num_open}};
    emit_assignment(g, cfg, res->assignment, obj, res->diag.value, res->report, extra);
    return 0;
  }
  if (o.algo == "kcenter-exact") {
    cfg["objective"] = "kcenter";
    auto res = balcl::kcenter_cluster(inst, cons);
    if (!res) throw balcl::InfeasibleError("cluster: no threshold admits a feasible allocation");
    double value = balcl::evaluate(inst, res->assignment, balcl::Objective::KCenter);
    balcl::ViolationReport report = balcl::check_capacities(res->assignment, cons);
    json extra{{"t_star", res->t_star},
               {"num_components", res->diag.num_components},
               {"max_hop", res->diag.max_hop},
               {"max_assigned_distance", res->diag.max_assigned_distance}};
    emit_assignment(g, cfg, res->assignment, balcl::Objective::KCenter, value, report, extra);
    return 0;
  }
  if (o.algo == "kmeanspp") {
    require(o.p == 1, "cluster: kmeanspp supports p = 1 only");
    balcl::Objective obj = balcl::parse_objective(o.objective.empty() ? "kmeans" : o.objective);
    cfg["objective"] = balcl::objective_name(obj);
    cfg["oversample"] = o.oversample;
    cfg["lloyd_iters"] = o.lloyd_iters;
    balcl::SeedingConfig sc;
    sc.oversample_count = o.oversample;
    sc.lloyd_iters = o.lloyd_iters;
    sc.seed = g.seed;
    balcl::Rng rng = balcl::make_rng(g.seed);
    auto [a, report] = balcl::kmeanspp_balanced(inst, cons, sc, rng);
    emit_assignment(g, cfg, a, obj, balcl::evaluate(inst, a, obj), report, {});
    return 0;
  }
  if (o.algo == "bbg") {
    require(o.p == 1, "cluster: bbg supports p = 1 only");
    cfg["objective"] = "kmedian";
    balcl::ThresholdClustering tc = balcl::tau_sweep(inst, o.k, o.ell, o.cap_l);
    balcl::Assignment a = clusters_to_assignment(inst, tc.clusters, balcl::Objective::KMedian);
    balcl::ViolationReport report = balcl::check_capacities(a, cons);
    emit_assignment(g, cfg, a, balcl::Objective::KMedian,
                    balcl::evaluate(inst, a, balcl::Objective::KMedian), report,
                    json{{"tau", tc.tau}});
    return 0;
  }
  if (o.algo == "kcenter-stable") {
    require(o.p == 1, "cluster: kcenter-stable supports p = 1 only");
    cfg["objective"] = "kcenter";
    auto res = balcl::kcenter_stable(inst, o.k, o.ell, o.cap_l);
    if (!res)
      throw balcl::InfeasibleError(
          "cluster: no threshold yields k balanced components (instance not stable)");
    balcl::Assignment a =
        clusters_to_assignment(inst, res->clustering.clusters, balcl::Objective::KCenter);
    balcl::ViolationReport report = balcl::check_capacities(a, cons);
    emit_assignment(g, cfg, a, balcl::Objective::KCenter,
                    balcl::evaluate(inst, a, balcl::Objective::KCenter), report,
                    json{{"r_star", res->r_star}});
    return 0;
  }
  require(false, "cluster: unknown --algo '" + o.algo + "'");
  return 1;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOpts {
  std::string in;
  std::string objective = "kmedian";
  int k = 1;
  int p = 1;
  double ell = 0.0;
  double cap_l = 1.0;
};

int run_oracle(const GlobalOpts& g, const OracleOpts& o) {
  balcl::Instance inst = balcl::read_instance_csv(o.in);
  balcl::Constraints cons{o.k, o.p, o.ell, o.cap_l};
  balcl::Objective obj = balcl::parse_objective(o.objective);
  json cfg = global_config(g, "oracle");
  cfg["in"] = o.in;
  cfg["objective"] = balcl::objective_name(obj);
  cfg["k"] = o.k;
  cfg["p"] = o.p;
  cfg["ell"] = o.ell;
  cfg["cap_L"] = o.cap_l;
  balcl::OracleResult res = balcl::brute_force_opt(inst, cons, obj);
  balcl::ViolationReport report = balcl::check_capacities(res.assignment, cons);
  emit_assignment(g, cfg, res.assignment, obj, res.value, report, {});
  return 0;
}

// ---------------------------------------------------------------------------
// dispatch fit / route

struct FitOpts {
  std::string in;
  std::string algo = "kmeanspp";
  int k = 4;
  int p = 1;
  double ell = 0.0;
  double cap_l = 1.0;
  int sample_size = 2000;
  int second_sample_size = -1;
  std::string backend = "auto";
  int leaf_size = 32;
  std::string objective = "kmeans";
};

int run_dispatch_fit(const GlobalOpts& g, const FitOpts& o) {
  require(!g.out.empty(), "dispatch fit: missing --out");
  balcl::Instance inst = balcl::read_points_csv(o.in);
  require(inst.has_points(), "dispatch fit: needs point-form data");
  balcl::Rng rng = balcl::make_rng(g.seed);

  int want = std::min(std::max(1, o.sample_size), inst.n);
  std::vector<int> all(inst.n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> sub;
  std::sample(all.begin(), all.end(), std::back_inserter(sub), want, rng);
  balcl::PointSet S{static_cast<int>(sub.size()), inst.dim, {}};
  for (int i : sub) S.data.insert(S.data.end(), inst.point(i), inst.point(i) + inst.dim);

  json cfg = global_config(g, "dispatch fit");
  cfg["in"] = o.in;
  cfg["algo"] = o.algo;
  cfg["k"] = o.k;
  cfg["sample_size"] = want;

  std::unique_ptr<balcl::Dispatcher> disp;
  if (o.algo == "random") {
    disp = balcl::random_dispatcher(o.k, inst.dim, rng);
  } else if (o.algo == "bpt") {
    disp = balcl::bpt_dispatcher(S, o.k, rng);
  } else if (o.algo == "lsh") {
    disp = balcl::lsh_dispatcher(S, o.k, rng);
  } else {
    int want2 = o.second_sample_size > 0 ? o.second_sample_size : want;
    balcl::PointSet S2{want2, inst.dim, {}};
    for (int s = 0; s < want2; ++s) {
      int i = static_cast<int>(rng() % inst.n);
      S2.data.insert(S2.data.end(), inst.point(i), inst.point(i) + inst.dim);
    }
    balcl::Constraints cons{o.k, o.p, o.ell, o.cap_l};
    balcl::FitOptions fopts;
    fopts.leaf_size = o.leaf_size;
    fopts.objective = balcl::parse_objective(o.objective);
    fopts.seeding.seed = g.seed;
    if (o.backend == "auto")
      fopts.backend = balcl::NnBackend::Auto;
    else if (o.backend == "exact")
      fopts.backend = balcl::NnBackend::Exact;
    else if (o.backend == "tree")
      fopts.backend = balcl::NnBackend::Tree;
    else
      require(false, "dispatch fit: unknown --backend '" + o.backend + "'");
    if (o.algo == "kmeanspp")
      fopts.algo = balcl::FitAlgo::KMeansPP;
    else if (o.algo == "lp-round")
      fopts.algo = balcl::FitAlgo::LpRound;
    else if (o.algo == "oracle")
      fopts.algo = balcl::FitAlgo::Oracle;
    else
      require(false, "dispatch fit: unknown --algo '" + o.algo + "'");
    cfg["p"] = o.p;
    cfg["ell"] = o.ell;
    cfg["cap_L"] = o.cap_l;
    cfg["second_sample_size"] = want2;
    cfg["backend"] = o.backend;
    cfg["leaf_size"] = o.leaf_size;
    cfg["objective"] = o.objective;
    disp = balcl::fit_dispatcher(S, S2, cons, fopts, rng);
  }

  std::ofstream os(g.out, std::ios::binary);
  require(os.good(), "cannot open output file: " + g.out);
  disp->save(os);
  require(os.good(), "failed writing output file: " + g.out);
  cfg["type"] = disp->type();
  cfg["dim"] = disp->dim();
  cfg["fitted_p"] = disp->p();
  write_sidecar(g.out, cfg);
  log_info(g, "fitted " + disp->type() + " dispatcher -> " + g.out);
  return 0;
}

struct RouteOpts {
  std::string model;
  std::string in;
};

int run_dispatch_route(const GlobalOpts& g, const RouteOpts& o) {
  require(!g.out.empty(), "dispatch route: missing --out");
  std::ifstream is(o.model, std::ios::binary);
  require(is.good(), "cannot open model file: " + o.model);
  std::unique_ptr<balcl::Dispatcher> disp = balcl::load_dispatcher(is);
  balcl::Instance inst = balcl::read_points_csv(o.in);
  require(inst.dim == disp->dim(), "dispatch route: point dimension " + std::to_string(inst.dim) +
                                       " != dispatcher dimension " + std::to_string(disp->dim()));
  json cfg = global_config(g, "dispatch route");
  cfg["model"] = o.model;
  cfg["in"] = o.in;
  cfg["type"] = disp->type();
  cfg["k"] = disp->k();
  cfg["p"] = disp->p();

  std::vector<std::vector<int>> routes(inst.n);
  for (int i = 0; i < inst.n; ++i) routes[i] = disp->route(inst.point(i));

  std::string fmt = resolve_format(g, "csv");
  if (fmt == "json") {
    json doc{{"config", cfg}, {"routes", routes}};
    balcl::write_json(g.out, doc);
  } else {
    std::string body;
    for (int c = 0; c < disp->p(); ++c) body += (c ? ",c" : "c") + std::to_string(c);
    body += "\n";
    for (const auto& r : routes) {
      for (std::size_t c = 0; c < r.size(); ++c)
        body += (c ? "," : "") + std::to_string(r[c]);
      body += "\n";
    }
    write_text(g.out, body);
    write_sidecar(g.out, cfg);
  }
  log_info(g, "routed " + std::to_string(inst.n) + " points -> " + g.out);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::string config_path;
  std::string plot_path;
  int k_override = -1;
  std::string dispatcher_override;
  int workers_override = -1;
  int repeats_override = -1;
  int subsample_override = -1;
};

balcl::Instance dataset_from_spec(const json& spec, std::uint64_t default_seed) {
  require(spec.is_object(), "simulate: dataset spec must be an object");
  if (spec.contains("csv")) return balcl::read_points_csv(spec.at("csv").get<std::string>());
  require(spec.contains("gen"), "simulate: dataset spec needs \"csv\" or \"gen\"");
  std::string name = spec.at("gen").get<std::string>();
  balcl::Rng rng = balcl::make_rng(spec.value("seed", default_seed));
  if (name == "gmm")
    return balcl::gen_gaussian_mixture(spec.value("components", 20), spec.value("dims", 10),
                                       spec.value("sigma", 0.05), spec.value("n", 2000), rng,
                                       spec.value("n_labels", 0));
  if (name == "grid") return balcl::gen_grid_rect(spec.value("n", 4000), rng, spec.value("dims", 100));
  if (name == "twogauss") return balcl::gen_two_gaussians(spec.value("n", 2000), rng);
  require(false, "simulate: generator '" + name + "' has no labeled point form");
  return {};
}

json timings_to_json(const balcl::PhaseTimings& t) {
  return json{{"fit", t.fit},
              {"dispatch_train", t.dispatch_train},
              {"train", t.train},
              {"dispatch_test", t.dispatch_test},
              {"predict", t.predict},
              {"total", t.total}};
}

int run_simulate(const GlobalOpts& g, const SimulateOpts& o) {
  require(!g.out.empty(), "simulate: missing --out");
  json spec = balcl::read_json(o.config_path);
  require(spec.contains("train") && spec.contains("test"),
          "simulate: config needs \"train\" and \"test\" dataset specs");

  std::vector<int> ks;
  if (o.k_override > 0)
    ks = {o.k_override};
  else if (spec.contains("ks"))
    ks = spec.at("ks").get<std::vector<int>>();
  else
    ks = {spec.value("k", 4)};
  require(!ks.empty(), "simulate: empty k list");

  balcl::ExperimentConfig base;
  base.dispatcher = o.dispatcher_override.empty() ? spec.value("dispatcher", std::string("kmeanspp"))
                                                  : o.dispatcher_override;
  base.subsample = o.subsample_override > 0 ? o.subsample_override : spec.value("subsample", 2000);
  base.second_sample = spec.value("second_sample", -1);
  base.workers = o.workers_override > 0 ? o.workers_override : spec.value("workers", 1);
  base.repeats = o.repeats_override > 0 ? o.repeats_override : spec.value("repeats", 1);
  base.lambda = spec.value("lambda", -1.0);
  base.epochs = spec.value("epochs", 200);
  base.step0 = spec.value("step0", 1.0);
  base.ell = spec.value("ell", -1.0);
  base.cap_L = spec.value("cap_L", -1.0);
  base.seed = g.seed_given ? g.seed : spec.value("seed", std::uint64_t{0});
  if (g.threads > 0) base.workers = std::min(base.workers, g.threads);

  balcl::Instance train = dataset_from_spec(spec.at("train"), 1);
  balcl::Instance test = dataset_from_spec(spec.at("test"), 2);
  log_info(g, "train n=" + std::to_string(train.n) + ", test n=" + std::to_string(test.n));

  json cfg = global_config(g, "simulate");
  cfg["train"] = spec.at("train");
  cfg["test"] = spec.at("test");
  cfg["ks"] = ks;
  cfg["dispatcher"] = base.dispatcher;
  cfg["subsample"] = base.subsample;
  cfg["second_sample"] = base.second_sample;
  cfg["workers"] = base.workers;
  cfg["repeats"] = base.repeats;
  cfg["lambda"] = base.lambda;
  cfg["epochs"] = base.epochs;
  cfg["step0"] = base.step0;
  cfg["ell"] = base.ell;
  cfg["cap_L"] = base.cap_L;
  cfg["seed"] = base.seed;

  json results = json::array();
  std::string plot_csv = "k,accuracy\n";
  for (int k : ks) {
    balcl::ExperimentConfig ec = base;
    ec.k = k;
    balcl::ExperimentResult r = balcl::run_experiment(train, test, ec);
    json row{{"k", k},
             {"cluster_sizes", r.cluster_sizes},
             {"guard_tripped", r.guard_tripped},
             {"repeats_used", r.repeats_used},
             {"timings", timings_to_json(r.timings)}};
    if (std::isfinite(r.accuracy)) row["accuracy"] = r.accuracy;
    if (std::isfinite(r.entropy)) row["entropy"] = r.entropy;
    results.push_back(row);
    plot_csv += std::to_string(k) + "," +
                (std::isfinite(r.accuracy) ? std::to_string(r.accuracy) : "nan") + "\n";
    log_info(g, "k=" + std::to_string(k) + " accuracy=" +
                    (std::isfinite(r.accuracy) ? std::to_string(r.accuracy) : "omitted (guard)"));
  }

  json doc{{"config", cfg}, {"results", results}};
  if (spec.contains("scaling")) {
    std::vector<int> counts = spec.at("scaling").get<std::vector<int>>();
    if (g.threads > 0)
      for (int& c : counts) c = std::min(c, g.threads);
    balcl::ExperimentConfig ec = base;
    ec.k = ks.front();
    balcl::ScalingReport sr = balcl::scaling_run(train, test, ec, counts);
    json phases = json::array();
    for (const auto& t : sr.timings) phases.push_back(timings_to_json(t));
    doc["scaling"] = json{{"worker_counts", sr.worker_counts},
                          {"speedup", sr.speedup},
                          {"timings", phases}};
  }

  std::string fmt = resolve_format(g, "json");
  if (fmt == "json") {
    balcl::write_json(g.out, doc);
  } else {
    std::string body = "k,accuracy,entropy,guard_tripped,repeats_used\n";
    for (const auto& row : results) {
      body += std::to_string(row.at("k").get<int>()) + ",";
      body += (row.contains("accuracy") ? std::to_string(row.at("accuracy").get<double>()) : "nan");
      body += ",";
      body += (row.contains("entropy") ? std::to_string(row.at("entropy").get<double>()) : "nan");
      body += ",";
      body += row.at("guard_tripped").get<bool>() ? "1," : "0,";
      body += std::to_string(row.at("repeats_used").get<int>()) + "\n";
    }
    write_text(g.out, body);
    write_sidecar(g.out, cfg);
  }
  if (!o.plot_path.empty()) {
    write_text(o.plot_path, plot_csv);
    write_sidecar(o.plot_path, cfg);
  }
  log_info(g, "wrote " + g.out);
  return 0;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const GlobalOpts& g, const std::string& in) {
  balcl::Instance inst = balcl::read_instance_csv(in);
  json cfg = global_config(g, "validate");
  cfg["in"] = in;
  std::string message;
  bool metric = true;
  if (inst.has_matrix()) {
    try {
      inst.validate_metric();
    } catch (const balcl::InvalidArgument& e) {
      metric = false;
      message = e.what();
    }
  } else {
    message = "point-form data is Euclidean and therefore metric";
  }
  if (!g.out.empty())
    balcl::write_json(g.out, json{{"config", cfg}, {"metric", metric}, {"message", message}});
  if (metric) {
    std::cout << "metric OK: " << in << (message.empty() ? "" : " (" + message + ")") << "\n";
    return 0;
  }
  std::cout << "not a metric: " << message << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"balcl: balanced fault-tolerant clustering and dispatch"};
  app.require_subcommand(1);

  GlobalOpts g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed (default 0)");
  app.add_option("--out", g.out, "Output file path");
  app.add_option("--format", g.format, "Output format for result documents")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--log-level", g.log_level, "quiet | info | debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));
  app.add_option("--threads", g.threads, "Cap every thread pool at N");

  GenOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a dataset CSV");
  gen_cmd->fallthrough();
  gen_cmd->add_option("name", gen.name, "star | groups | gmm | grid | twogauss")->required();
  gen_cmd->add_option("--nl", gen.nl, "Leaves-per-arm (star) / group size parameter (groups)");
  gen_cmd->add_option("--k-prime", gen.k_prime, "Number of groups (groups)");
  gen_cmd->add_flag("--perturb", gen.perturb, "Jitter intra-group distances (groups)");
  gen_cmd->add_option("--components", gen.components, "Mixture components (gmm)");
  gen_cmd->add_option("--dims", gen.dims, "Dimensions (gmm, grid)");
  gen_cmd->add_option("--sigma", gen.sigma, "Component spread (gmm)");
  gen_cmd->add_option("--n", gen.n, "Number of points (gmm, grid, twogauss)");
  gen_cmd->add_option("--n-labels", gen.n_labels, "Label count, 0 for default (gmm)");

  ClusterOpts cl;
  CLI::App* cluster_cmd = app.add_subcommand("cluster", "Cluster a dataset");
  cluster_cmd->fallthrough();
  cluster_cmd->add_option("--in", cl.in, "Input CSV (points or distance matrix)")->required();
  cluster_cmd
      ->add_option("--algo", cl.algo, "lp-round | kcenter-exact | kmeanspp | bbg | kcenter-stable")
      ->required()
      ->check(CLI::IsMember({"lp-round", "kcenter-exact", "kmeanspp", "bbg", "kcenter-stable"}));
  cluster_cmd->add_option("--objective", cl.objective, "kmedian | kmeans | kcenter");
  cluster_cmd->add_option("--k", cl.k, "Number of centers")->required();
  cluster_cmd->add_option("--p", cl.p, "Replication (centers per point)");
  cluster_cmd->add_option("--ell", cl.ell, "Lower capacity fraction");
  cluster_cmd->add_option("--cap-l", cl.cap_l, "Upper capacity fraction");
  cluster_cmd->add_option("--oversample", cl.oversample, "Seeding oversample count (kmeanspp)");
  cluster_cmd->add_option("--lloyd-iters", cl.lloyd_iters, "Lloyd iterations (kmeanspp)");
  cluster_cmd->add_option("--dump-lp", cl.dump_lp, "Write the relaxation LP as text (lp-round)");

  OracleOpts orc;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Brute-force optimal clustering");
  oracle_cmd->fallthrough();
  oracle_cmd->add_option("--in", orc.in, "Input CSV")->required();
  oracle_cmd->add_option("--objective", orc.objective, "kmedian | kmeans | kcenter");
  oracle_cmd->add_option("--k", orc.k, "Number of centers")->required();
  oracle_cmd->add_option("--p", orc.p, "Replication");
  oracle_cmd->add_option("--ell", orc.ell, "Lower capacity fraction");
  oracle_cmd->add_option("--cap-l", orc.cap_l, "Upper capacity fraction");

  CLI::App* dispatch_cmd = app.add_subcommand("dispatch", "Fit or apply a dispatcher");
  dispatch_cmd->fallthrough();
  dispatch_cmd->require_subcommand(1);
  FitOpts fo;
  CLI::App* fit_cmd = dispatch_cmd->add_subcommand("fit", "Fit a dispatcher on a subsample");
  fit_cmd->fallthrough();
  fit_cmd->add_option("--in", fo.in, "Input points CSV")->required();
  fit_cmd->add_option("--algo", fo.algo, "kmeanspp | lp-round | oracle | random | bpt | lsh")
      ->check(CLI::IsMember({"kmeanspp", "lp-round", "oracle", "random", "bpt", "lsh"}));
  fit_cmd->add_option("--k", fo.k, "Number of clusters")->required();
  fit_cmd->add_option("--p", fo.p, "Replication (lp-round)");
  fit_cmd->add_option("--ell", fo.ell, "Lower capacity fraction");
  fit_cmd->add_option("--cap-l", fo.cap_l, "Upper capacity fraction");
  fit_cmd->add_option("--sample-size", fo.sample_size, "Fit subsample size");
  fit_cmd->add_option("--second-sample-size", fo.second_sample_size,
                      "Weight-estimation sample size (-1: same as --sample-size)");
  fit_cmd->add_option("--backend", fo.backend, "auto | exact | tree")
      ->check(CLI::IsMember({"auto", "exact", "tree"}));
  fit_cmd->add_option("--leaf-size", fo.leaf_size, "RP-tree leaf size");
  fit_cmd->add_option("--objective", fo.objective, "Clustering objective (lp-round/oracle)");
  RouteOpts ro;
  CLI::App* route_cmd = dispatch_cmd->add_subcommand("route", "Route points with a saved model");
  route_cmd->fallthrough();
  route_cmd->add_option("--model", ro.model, "Saved dispatcher file")->required();
  route_cmd->add_option("--in", ro.in, "Input points CSV")->required();

  SimulateOpts so;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Distributed-learning simulation");
  simulate_cmd->fallthrough();
  simulate_cmd->add_option("--config", so.config_path, "Experiment config JSON")->required();
  simulate_cmd->add_option("--emit-plot-data", so.plot_path, "Also write a (k, accuracy) CSV");
  simulate_cmd->add_option("--k", so.k_override, "Override: single k");
  simulate_cmd->add_option("--dispatcher", so.dispatcher_override, "Override: dispatcher");
  simulate_cmd->add_option("--workers", so.workers_override, "Override: worker count");
  simulate_cmd->add_option("--repeats", so.repeats_override, "Override: repeat count");
  simulate_cmd->add_option("--subsample", so.subsample_override, "Override: fit subsample size");

  std::string validate_in;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a distance matrix for metricity");
  validate_cmd->fallthrough();
  validate_cmd->add_option("--in", validate_in, "Input CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (gen_cmd->parsed()) return run_gen(g, gen);
    if (cluster_cmd->parsed()) return run_cluster(g, cl);
    if (oracle_cmd->parsed()) return run_oracle(g, orc);
    if (dispatch_cmd->parsed()) {
      if (fit_cmd->parsed()) return run_dispatch_fit(g, fo);
      if (route_cmd->parsed()) return run_dispatch_route(g, ro);
    }
    if (simulate_cmd->parsed()) return run_simulate(g, so);
    if (validate_cmd->parsed()) return run_validate(g, validate_in);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const balcl::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const balcl::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const balcl::InvariantError& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
