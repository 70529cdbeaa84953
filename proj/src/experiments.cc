#include "popctl/experiments.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "popctl/applications.h"
#include "popctl/lower_bound.h"
#include "popctl/mixing.h"
#include "popctl/rng.h"

namespace popctl {

namespace {

const std::set<std::string> kControllerKeys = {
    "experiment", "seed",     "T",          "H",        "step_size",
    "eta",        "optimizer", "gradient",  "tau",      "theory_c",
    "lipschitz"};

std::set<std::string> with_controller_keys(std::set<std::string> keys) {
  keys.insert(kControllerKeys.begin(), kControllerKeys.end());
  return keys;
}

struct ExperimentSpec {
  std::set<std::string> keys;
  std::string text;
};

const std::map<std::string, ExperimentSpec>& specs() {
  static const std::map<std::string, ExperimentSpec> table = {
      {"sir",
       {with_controller_keys({"beta", "theta", "xi", "x1", "c2", "c3"}),
        R"(sir: controlled SIR epidemic, state (S, I, R), control (prevent, allow).
  x' = (1-g) f(x, u) + g w with
    S' = (1 - beta I) S + xi R + beta I S u(1)
    I' = (1 - theta) I + beta I S u(2)
    R' = theta I + (1 - xi) R
  cost c(x, u) = c3 I^2 + c2 S u(1)
  defaults: beta=0.5 theta=0.03 xi=0.005 x1=0.9,0.1,0 c2=1 c3=10 T=200 H=5,
            no perturbation (g = 0)
  policies: gpc-simplex, full-prevention u=(1,0), no-prevention u=(0,1))"}},
      {"sir-noisy",
       {with_controller_keys({"beta", "theta", "xi", "x1", "c2", "c3",
                              "noise_mode", "gamma_rate", "gamma_prob",
                              "noise_w"}),
        R"(sir-noisy: the SIR model with perturbations.
  noise_mode=burst:  w_t = noise_w (default 0,1,0), g_t = gamma_rate w.p.
                     gamma_prob, else 0
  noise_mode=random: w_t uniform entries normalized to 1, g_t = gamma_rate
  defaults: c2=1 c3=5 gamma_rate=0.01 gamma_prob=0.2 T=200 H=5
  policies: gpc-simplex, full-prevention, no-prevention)"}},
      {"hospital",
       {with_controller_keys({"beta", "theta", "xi", "x1", "c2", "c3",
                              "y_max", "sigma0", "reference_csv"}),
        R"(hospital: SIR model with a hospital-capacity cost.
  cost c(x, u) = -S_inf(S, I) + c2 u(1)^2
                 + c3 (I - y_max) / (1 + exp(-100 (I - y_max)))
  S_inf(S, I) = W0(-sigma0 I exp(-sigma0 (S + I))) / sigma0, W0 the principal
  branch of the Lambert W function
  defaults: beta=0.3 theta=0.1 xi=0 sigma0=3 x1=0.9,0.01,0.09 y_max=0.1
            c2=0.01 c3=100 T=100 H=5
  reference_csv: optional file with columns t,S,I,u (u = prevention level);
                 its controls are replayed as policy 'reference'
  policies: gpc-simplex, no-control u=(0,1), full-prevention u=(1,0))"}},
      {"replicator",
       {with_controller_keys({"evolution_rate", "x1", "grid_resolution"}),
        R"(replicator: controlled Rock-Paper-Scissors replicator dynamics.
  x'_i = x_i + rate x_i (M(u) x)_i,  M(u) = [[0,u1,-u3],[-u1,0,u2],[u3,-u2,0]]
  cost c(x, u) = x(1)^2
  defaults: evolution_rate=0.25 x1 uniform T=100 H=5 grid_resolution=50
  policies: gpc-simplex, best-response (greedy on the previous cost),
            uniform-default u=(1/3,1/3,1/3))"}},
      {"replicator-random-cost",
       {with_controller_keys({"evolution_rate", "x1", "grid_resolution",
                              "coin_prob", "window"}),
        R"(replicator-random-cost: replicator dynamics with a coin-flip cost.
  c_t(x, u) = x(1)^2 + u(3)^2 with probability coin_prob, else x(1)^2
  defaults: T=200 H=5 coin_prob=0.5 window=15
  extra output: trailing mean cost over the last min(t, window) rounds
  policies: gpc-simplex, best-response, uniform-default)"}},
      {"lowerbound",
       {with_controller_keys({"variant", "beta_lb", "T_list", "trials",
                              "controller"}),
        R"(lowerbound: regret on the two-branch hard instances.
  variant=simplex: A = B = I_2, x1 = (0,1), |u|_1 <= beta_lb/T,
    g_t = 1/2 only at t = T/2, w = (1/2,1/2) or (1,0),
    c_t = |x(2) - 1/2| for t > T/2; comparators (beta_lb/T)(1/2,1/2) and 0
  variant=scalar: x' = x - (beta_lb/T) u + w, x1 = 1, w_{T/2} = -1 or 0,
    c_t = |x| + |u| for t > T/2; comparators u = x and u = 0
  defaults: variant=simplex beta_lb=32 T_list=100,200,400 trials=20
            controller=gpc-simplex (simplex) or pi0 (scalar)
  output: lowerbound_regret.csv with mean regret per T)"}},
      {"mixing-report",
       {{"experiment", "seed", "A", "B", "K", "t_max", "eps", "t_cap"},
        R"(mixing-report: mixing quantities of a column-stochastic matrix.
  D(t) = max_j |X^t e_j - pi|_1,  Dbar(t) = max_{j,k} |X^t (e_j - e_k)|_1
  X = A, or the closed loop (1 - |K|_{1->1}) A + B K when B and K are given
  defaults: A = 0.9,0.1,0;0.1,0.8,0.1;0,0.1,0.9 t_max=20 eps=0.25 t_cap=1000
  output: mixing_report.csv (t,D,Dbar) and mixing_report.json)"}},
      {"custom-simplex-lds",
       {with_controller_keys({"A", "B", "x1", "alpha_lb", "alpha_ub",
                              "target", "gamma_rate", "gamma_prob"}),
        R"(custom-simplex-lds: a user-supplied simplex LDS.
  x' = (1-g) [(1 - |u|_1) A x + B u] + g w, u in the union of alpha-scaled
  simplices for alpha in [alpha_lb, alpha_ub]
  cost c(x, u) = |x - target|_1
  perturbations: w_t uniform entries normalized to 1, g_t = gamma_rate w.p.
  gamma_prob
  defaults: A = B = 0.9,0.1;0.1,0.9 x1=1,0 alpha_lb=0 alpha_ub=1
            target=0.5,0.5 gamma_rate=0.1 gamma_prob=0.2 T=200 H=5
            optimizer=lazy-md
  policies: gpc-simplex, target-max u = alpha_ub target,
            uniform-min u = alpha_lb uniform)"}},
  };
  return table;
}

void check_dist_param(const std::string& key, const Vec& v, int d) {
  if (v.size() != d) {
    throw Error("config key '" + key + "' needs " + std::to_string(d) +
                " entries");
  }
  if (!validate_dist(v).ok()) {
    throw Error("config key '" + key + "' must be a distribution");
  }
}

void check_unit_interval(const std::string& key, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error("config key '" + key + "' must lie in [0, 1]");
  }
}

void check_trajectory(const Trajectory& traj, const ControlSet& cs,
                      const std::string& policy) {
  for (int t = 0; t < traj.size(); ++t) {
    if (!validate_dist(traj.x[t]).ok() || !cs.Contains(traj.u[t])) {
      throw InvariantViolation(policy + " produced an invalid row at t=" +
                               std::to_string(t + 1));
    }
  }
}

std::vector<SummaryRow> summarize(const std::vector<PolicyRun>& runs) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < runs.size(); ++i) {
    best = std::min(best, runs[i].trajectory.total_cost());
  }
  if (runs.size() == 1) best = runs[0].trajectory.total_cost();
  std::vector<SummaryRow> out;
  for (const auto& r : runs) {
    out.push_back({r.policy, r.trajectory.total_cost(),
                   r.trajectory.total_cost() - best});
  }
  return out;
}

PolicyRun run_gpc(const System& sys, int T, const GpcOptions& opts) {
  GpcRun g = gpc_simplex_run(sys, T, opts);
  check_trajectory(g.trajectory, sys.control_set, "gpc-simplex");
  return {"gpc-simplex", std::move(g.trajectory), std::move(g.diagnostics)};
}

PolicyRun run_policy(const System& sys, int T, Controller& ctl) {
  Trajectory traj = simulate(sys, ctl, T);
  check_trajectory(traj, sys.control_set, ctl.name());
  return {ctl.name(), std::move(traj), std::nullopt};
}

int positive_T(const Config& cfg, int def) {
  int T = cfg.GetInt("T", def);
  if (T < 0) throw Error("config key 'T' must be nonnegative");
  return T;
}

// ---- SIR family -----------------------------------------------------------

SirParams sir_params(const Config& cfg, const SirParams& def) {
  SirParams p;
  p.beta = cfg.GetDouble("beta", def.beta);
  p.theta = cfg.GetDouble("theta", def.theta);
  p.xi = cfg.GetDouble("xi", def.xi);
  check_unit_interval("beta", p.beta);
  check_unit_interval("theta", p.theta);
  check_unit_interval("xi", p.xi);
  return p;
}

System sir_system(const SirParams& p, const Vec& x1, int T, const Cost& cost) {
  System sys;
  sys.dynamics = sir_dynamics(p);
  sys.control_set = {1.0, 1.0};
  sys.x1 = x1;
  sys.gamma.assign(T, 0.0);
  sys.noise.assign(T, uniform(3));
  sys.cost.assign(T, cost);
  return sys;
}

std::vector<PolicyRun> run_sir_family(const System& sys, int T,
                                      const GpcOptions& opts) {
  std::vector<PolicyRun> runs;
  runs.push_back(run_gpc(sys, T, opts));
  ConstantController full(basis(2, 0), "full-prevention");
  ConstantController none(basis(2, 1), "no-prevention");
  runs.push_back(run_policy(sys, T, full));
  runs.push_back(run_policy(sys, T, none));
  return runs;
}

ExperimentRun run_sir(const Config& cfg, bool noisy) {
  ExperimentRun run;
  const int T = positive_T(cfg, 200);
  SirParams p = sir_params(cfg, SirParams{});
  Vec x1 = cfg.GetVec("x1", (Vec(3) << 0.9, 0.1, 0.0).finished());
  check_dist_param("x1", x1, 3);
  double c2 = cfg.GetDouble("c2", 1.0);
  double c3 = cfg.GetDouble("c3", noisy ? 5.0 : 10.0);
  System sys = sir_system(p, x1, T, make_sir_cost(c2, c3));
  sys.lipschitz = cfg.GetDouble("lipschitz", 2.0 * c3 + c2);

  if (noisy) {
    std::string mode = cfg.GetString("noise_mode", "burst");
    double rate = cfg.GetDouble("gamma_rate", 0.01);
    double prob = cfg.GetDouble("gamma_prob", 0.2);
    check_unit_interval("gamma_rate", rate);
    check_unit_interval("gamma_prob", prob);
    Rng gamma_rng(run.seed = static_cast<std::uint64_t>(cfg.GetInt("seed", 0)),
                  "sir-noisy/gamma");
    Rng noise_rng(run.seed, "sir-noisy/noise");
    if (mode == "burst") {
      Vec w = cfg.GetVec("noise_w", basis(3, 1));
      check_dist_param("noise_w", w, 3);
      for (int t = 0; t < T; ++t) {
        sys.gamma[t] = gamma_rng.bernoulli(prob) ? rate : 0.0;
        sys.noise[t] = w;
      }
    } else if (mode == "random") {
      for (int t = 0; t < T; ++t) {
        sys.gamma[t] = rate;
        sys.noise[t] = noise_rng.normalized_uniform(3);
      }
    } else {
      throw Error("noise_mode must be 'burst' or 'random'");
    }
  }
  GpcOptions opts =
      gpc_options_from_config(cfg, T, sys.lipschitz, MirrorMethod::kExpWeights);
  run.policies = run_sir_family(sys, T, opts);
  return run;
}

ExperimentRun run_hospital(const Config& cfg) {
  ExperimentRun run;
  const int T = positive_T(cfg, 100);
  SirParams p = sir_params(cfg, SirParams{0.3, 0.1, 0.0});
  Vec x1 = cfg.GetVec("x1", (Vec(3) << 0.9, 0.01, 0.09).finished());
  check_dist_param("x1", x1, 3);
  HospitalCostParams hp;
  hp.c2 = cfg.GetDouble("c2", 0.01);
  hp.c3 = cfg.GetDouble("c3", 100.0);
  hp.y_max = cfg.GetDouble("y_max", 0.1);
  hp.sigma0 = cfg.GetDouble("sigma0", 3.0);
  if (!(hp.y_max > 0 && hp.y_max < 1)) throw Error("y_max must lie in (0, 1)");
  if (!(hp.c2 > 0 && hp.c3 > 0)) throw Error("c2 and c3 must be positive");
  if (!(hp.sigma0 > 0)) throw Error("sigma0 must be positive");
  System sys = sir_system(p, x1, T, make_hospital_cost(hp));
  sys.lipschitz = cfg.GetDouble("lipschitz", 1.0 + 2.0 * hp.c2 + 51.0 * hp.c3);
  GpcOptions opts =
      gpc_options_from_config(cfg, T, sys.lipschitz, MirrorMethod::kExpWeights);

  run.policies.push_back(run_gpc(sys, T, opts));
  ConstantController none(basis(2, 1), "no-control");
  ConstantController full(basis(2, 0), "full-prevention");
  run.policies.push_back(run_policy(sys, T, none));
  run.policies.push_back(run_policy(sys, T, full));

  std::string ref = cfg.GetString("reference_csv", "");
  if (!ref.empty()) {
    std::ifstream in(ref);
    if (!in) throw Error("cannot open reference_csv " + ref);
    std::string line;
    std::getline(in, line);
    if (line.rfind("t,S,I,u", 0) != 0) {
      throw Error("reference_csv must have header t,S,I,u");
    }
    std::vector<Vec> controls;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> cols;
      while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
      if (cols.size() < 4) throw Error("reference_csv row has too few columns");
      double prevent = std::clamp(cols[3], 0.0, 1.0);
      controls.push_back((Vec(2) << prevent, 1.0 - prevent).finished());
    }
    if (static_cast<int>(controls.size()) < T) {
      throw Error("reference_csv has fewer than T rows");
    }
    struct Replay : Controller {
      std::vector<Vec> u;
      std::string name() const override { return "reference"; }
      Vec Act(int t, const Vec&) override { return u[t - 1]; }
    } replay;
    replay.u = std::move(controls);
    run.policies.push_back(run_policy(sys, T, replay));
  }
  return run;
}

// ---- replicator -----------------------------------------------------------

ExperimentRun run_replicator(const Config& cfg, bool random_cost) {
  ExperimentRun run;
  run.seed = static_cast<std::uint64_t>(cfg.GetInt("seed", 0));
  const int T = positive_T(cfg, random_cost ? 200 : 100);
  RpsParams rp{cfg.GetDouble("evolution_rate", 0.25)};
  if (!(rp.evolution_rate > 0 && rp.evolution_rate <= 1)) {
    throw Error("evolution_rate must lie in (0, 1]");
  }
  Vec x1 = cfg.GetVec("x1", uniform(3));
  check_dist_param("x1", x1, 3);
  int res = cfg.GetInt("grid_resolution", 50);
  if (res < 1) throw Error("grid_resolution must be positive");

  System sys;
  sys.dynamics = replicator_dynamics(rp);
  sys.control_set = {1.0, 1.0};
  sys.x1 = x1;
  sys.gamma.assign(T, 0.0);
  sys.noise.assign(T, uniform(3));
  sys.lipschitz = cfg.GetDouble("lipschitz", random_cost ? 4.0 : 2.0);
  if (random_cost) {
    double prob = cfg.GetDouble("coin_prob", 0.5);
    check_unit_interval("coin_prob", prob);
    Rng coins(run.seed, "replicator-random-cost/coin");
    for (int t = 0; t < T; ++t) {
      sys.cost.push_back(coins.bernoulli(prob) ? make_rock_scissors_cost()
                                               : make_rock_cost());
    }
  } else {
    sys.cost.assign(T, make_rock_cost());
  }

  GpcOptions opts =
      gpc_options_from_config(cfg, T, sys.lipschitz, MirrorMethod::kExpWeights);
  run.policies.push_back(run_gpc(sys, T, opts));
  BestResponseController br(sys.dynamics.bracket, 3, res);
  ConstantController uni(uniform(3), "uniform-default");
  run.policies.push_back(run_policy(sys, T, br));
  run.policies.push_back(run_policy(sys, T, uni));

  if (random_cost) {
    int window = cfg.GetInt("window", 15);
    if (window < 1) throw Error("window must be positive");
    std::ostringstream os;
    os << "t";
    std::vector<std::vector<double>> cols;
    for (const auto& r : run.policies) {
      os << ',' << r.policy;
      cols.push_back(trailing_mean(r.trajectory.cost, window));
    }
    os << '\n';
    for (int t = 0; t < T; ++t) {
      os << t + 1;
      for (const auto& c : cols) os << ',' << format_double(c[t]);
      os << '\n';
    }
    run.tables.push_back({"replicator-random-cost_trailing.csv", os.str()});
  }
  return run;
}

// ---- lower bound ----------------------------------------------------------

ExperimentRun run_lowerbound(const Config& cfg) {
  ExperimentRun run;
  run.seed = static_cast<std::uint64_t>(cfg.GetInt("seed", 0));
  std::string variant = cfg.GetString("variant", "simplex");
  double beta = cfg.GetDouble("beta_lb", 32.0);
  std::vector<int> T_list = cfg.GetInts("T_list", {100, 200, 400});
  int trials = cfg.GetInt("trials", 20);
  if (beta < 2) throw Error("beta_lb must be at least 2");
  if (trials < 1) throw Error("trials must be positive");
  for (int T : T_list) {
    if (T < 2 || T % 2 || T < beta) {
      throw Error("every T in T_list must be even and at least beta_lb");
    }
  }

  LowerBoundTable table;
  std::string controller;
  if (variant == "simplex") {
    controller = cfg.GetString("controller", "gpc-simplex");
    ControllerFactory factory;
    if (controller == "gpc-simplex") {
      Config local = cfg;
      if (!local.Has("step_size")) local.Set("step_size", "theory");
      if (!local.Has("gradient")) local.Set("gradient", "exact");
      factory = [local](const System& sys, int T, int) {
        GpcOptions opts = gpc_options_from_config(local, T, sys.lipschitz,
                                                  MirrorMethod::kLazyMD);
        return std::make_unique<GpcSimplex>(sys.dynamics, sys.control_set,
                                            sys.x1, T, sys.lipschitz, opts);
      };
    } else if (controller == "pi0" || controller == "pi1") {
      int which = controller == "pi0" ? 0 : 1;
      factory = [which, beta](const System&, int T, int) {
        auto pair = make_simplex_lower_bound(beta, T);
        return std::make_unique<LinearPolicy>(pair.comparator[which]);
      };
    } else {
      throw Error("controller must be gpc-simplex, pi0 or pi1");
    }
    table = lower_bound_regret_harness(factory, beta, T_list, trials, run.seed);
  } else if (variant == "scalar") {
    controller = cfg.GetString("controller", "pi0");
    int which;
    if (controller == "pi0") {
      which = 0;
    } else if (controller == "pi1") {
      which = 1;
    } else {
      throw Error("scalar variant supports controller pi0 or pi1");
    }
    table = scalar_lower_bound_regret_harness(
        [which](const ScalarLowerBound&) { return scalar_comparator(which); },
        beta, T_list, trials, run.seed);
  } else {
    throw Error("variant must be 'simplex' or 'scalar'");
  }

  std::ostringstream os;
  os << "T,trials,mean_cost,mean_best_comparator,mean_regret,stddev_regret,"
        "regret_per_step\n";
  for (const auto& r : table.rows) {
    os << r.T << ',' << r.trials << ',' << format_double(r.mean_cost) << ','
       << format_double(r.mean_best_comparator) << ','
       << format_double(r.mean_regret) << ','
       << format_double(r.stddev_regret) << ','
       << format_double(r.regret_per_step) << '\n';
    run.summary.push_back({controller + "@T=" + std::to_string(r.T),
                           r.mean_cost, r.mean_regret});
  }
  run.tables.push_back({"lowerbound_regret.csv", os.str()});
  return run;
}

// ---- mixing report --------------------------------------------------------

ExperimentRun run_mixing_report(const Config& cfg) {
  ExperimentRun run;
  run.seed = static_cast<std::uint64_t>(cfg.GetInt("seed", 0));
  Mat a = cfg.GetMat("A", (Mat(3, 3) << 0.9, 0.1, 0.0, 0.1, 0.8, 0.1, 0.0,
                           0.1, 0.9).finished());
  if (a.rows() != a.cols()) throw Error("A must be square");
  if (!validate_stochastic(a).ok()) throw Error("A must be column-stochastic");
  Mat x = a;
  if (cfg.Has("B") || cfg.Has("K")) {
    Mat b = cfg.GetMat("B", Mat());
    Mat k = cfg.GetMat("K", Mat());
    if (b.rows() != a.rows() || k.rows() != b.cols() || k.cols() != a.cols()) {
      throw Error("B and K must be given together with matching shapes");
    }
    if (!validate_stochastic(b).ok()) throw Error("B must be column-stochastic");
    double scale = k.col(0).sum();
    if (!validate_scaled_stochastic(k, scale).ok() || scale > 1.0 + kTol) {
      throw Error("K must be a scaled stochastic matrix");
    }
    x = closed_loop(a, b, k);
  }
  int t_max = cfg.GetInt("t_max", 20);
  double eps = cfg.GetDouble("eps", 0.25);
  int t_cap = cfg.GetInt("t_cap", 1000);
  if (t_max < 0 || t_cap < 1) throw Error("t_max and t_cap must be positive");
  if (!(eps > 0 && eps < 2)) throw Error("eps must lie in (0, 2)");

  nlohmann::ordered_json report;
  std::ostringstream os;
  os << "t,D,Dbar\n";
  long t_mix = mixing_time(x, eps, t_cap);
  try {
    MixingProfile prof = mixing_profile(x, t_max, t_cap);
    for (long t = 0; t <= t_max; ++t) {
      os << t << ',' << format_double(prof.d_values[t]) << ','
         << format_double(prof.dbar_values[t]) << '\n';
    }
    report["stationary"] = std::vector<double>(
        prof.stationary.data(), prof.stationary.data() + prof.stationary.size());
  } catch (const NoUniqueStationary&) {
    for (long t = 0; t <= t_max; ++t) {
      os << t << ",inf," << format_double(dbar(x, t)) << '\n';
    }
    report["stationary"] = nullptr;
  }
  report["eps"] = eps;
  if (t_mix == kInfiniteTime) {
    report["t_mix"] = "inf";
  } else {
    report["t_mix"] = t_mix;
  }
  run.tables.push_back({"mixing_report.csv", os.str()});
  run.tables.push_back({"mixing_report.json", report.dump(2) + "\n"});
  return run;
}

// ---- custom simplex LDS ---------------------------------------------------

ExperimentRun run_custom(const Config& cfg) {
  ExperimentRun run;
  run.seed = static_cast<std::uint64_t>(cfg.GetInt("seed", 0));
  const int T = positive_T(cfg, 200);
  Mat def = (Mat(2, 2) << 0.9, 0.1, 0.1, 0.9).finished();
  Mat a = cfg.GetMat("A", def);
  Mat b = cfg.GetMat("B", def);
  const int d = static_cast<int>(a.rows());
  if (a.cols() != d || b.rows() != d) throw Error("A and B shapes disagree");
  if (!validate_stochastic(a).ok() || !validate_stochastic(b).ok()) {
    throw Error("A and B must be column-stochastic");
  }
  Vec x1 = cfg.GetVec("x1", basis(d, 0));
  check_dist_param("x1", x1, d);
  Vec target = cfg.GetVec("target", uniform(d));
  check_dist_param("target", target, d);
  ControlSet cs{cfg.GetDouble("alpha_lb", 0.0), cfg.GetDouble("alpha_ub", 1.0)};
  if (!(0 <= cs.alpha_lb && cs.alpha_lb <= cs.alpha_ub && cs.alpha_ub <= 1)) {
    throw Error("need 0 <= alpha_lb <= alpha_ub <= 1");
  }
  double rate = cfg.GetDouble("gamma_rate", 0.1);
  double prob = cfg.GetDouble("gamma_prob", 0.2);
  check_unit_interval("gamma_rate", rate);
  check_unit_interval("gamma_prob", prob);

  System sys;
  sys.dynamics = Dynamics::Linear(a, b);
  sys.control_set = cs;
  sys.x1 = x1;
  sys.lipschitz = cfg.GetDouble("lipschitz", 1.0);
  Rng gamma_rng(run.seed, "custom-simplex-lds/gamma");
  Rng noise_rng(run.seed, "custom-simplex-lds/noise");
  Cost cost;
  cost.value = [target](const Vec& x, const Vec&) {
    return (x - target).lpNorm<1>();
  };
  for (int t = 0; t < T; ++t) {
    sys.gamma.push_back(gamma_rng.bernoulli(prob) ? rate : 0.0);
    sys.noise.push_back(noise_rng.normalized_uniform(d));
    sys.cost.push_back(cost);
  }

  GpcOptions opts =
      gpc_options_from_config(cfg, T, sys.lipschitz, MirrorMethod::kLazyMD);
  run.policies.push_back(run_gpc(sys, T, opts));
  ConstantController hi(cs.alpha_ub * target, "target-max");
  ConstantController lo(uniform(d, cs.alpha_lb), "uniform-min");
  run.policies.push_back(run_policy(sys, T, hi));
  run.policies.push_back(run_policy(sys, T, lo));
  return run;
}

}  // namespace

GpcOptions gpc_options_from_config(const Config& cfg, int T, double lipschitz,
                                   MirrorMethod default_method) {
  GpcOptions o;
  o.tau = cfg.GetDouble("tau", 1.0);
  if (!(o.tau > 0)) throw Error("tau must be positive");
  if (cfg.GetString("H", "") == "auto") {
    o.H = default_history_length(o.tau, lipschitz, std::max(T, 1));
  } else {
    o.H = cfg.GetInt("H", 5);
  }
  if (o.H < 1) throw Error("H must be at least 1");

  std::string preset = cfg.GetString("step_size", "experiment");
  if (cfg.Has("eta") && !cfg.Has("step_size")) preset = "explicit";
  if (cfg.Has("eta") && preset != "explicit") {
    throw Error("eta is only used with step_size = explicit");
  }
  if (preset == "experiment") {
    o.preset = StepSizePreset::kExperiment;
    if (o.H < 2) throw Error("the experiment step size needs H >= 2");
  } else if (preset == "theory") {
    o.preset = StepSizePreset::kTheory;
  } else if (preset == "explicit") {
    o.preset = StepSizePreset::kExplicit;
    o.eta = cfg.GetDouble("eta", 0.0);
    if (!(o.eta > 0)) throw Error("explicit step size needs eta > 0");
  } else {
    throw Error("step_size must be experiment, theory or explicit");
  }
  o.theory_c = cfg.GetDouble("theory_c", 1.0);

  std::string method = cfg.GetString("optimizer", "");
  if (method.empty()) {
    o.method = default_method;
  } else if (method == "lazy-md") {
    o.method = MirrorMethod::kLazyMD;
  } else if (method == "exp-weights") {
    o.method = MirrorMethod::kExpWeights;
  } else {
    throw Error("optimizer must be lazy-md or exp-weights");
  }

  std::string grad = cfg.GetString("gradient", "fd");
  if (grad == "fd") {
    o.gradient = GradientMethod::kFiniteDifference;
  } else if (grad == "exact") {
    o.gradient = GradientMethod::kExact;
  } else {
    throw Error("gradient must be fd or exact");
  }
  return o;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "sir",        "sir-noisy",     "hospital",
      "replicator", "replicator-random-cost", "lowerbound",
      "mixing-report", "custom-simplex-lds"};
  return names;
}

std::string describe_experiment(const std::string& name) {
  auto it = specs().find(name);
  if (it == specs().end()) {
    std::string valid;
    for (const auto& n : experiment_names()) valid += " " + n;
    throw Error("unknown experiment '" + name + "'; valid names:" + valid);
  }
  std::string keys;
  for (const auto& k : it->second.keys) keys += " " + k;
  return it->second.text + "\n  keys:" + keys + "\n";
}

ExperimentRun execute_experiment(const Config& cfg) {
  std::string name = cfg.GetString("experiment", "");
  if (name.empty()) throw Error("config must set 'experiment'");
  auto it = specs().find(name);
  if (it == specs().end()) describe_experiment(name);
  cfg.RequireKnown(it->second.keys);
  if (cfg.GetInt("seed", 0) < 0) throw Error("seed must be nonnegative");

  ExperimentRun run;
  if (name == "sir") {
    run = run_sir(cfg, false);
  } else if (name == "sir-noisy") {
    run = run_sir(cfg, true);
  } else if (name == "hospital") {
    run = run_hospital(cfg);
  } else if (name == "replicator") {
    run = run_replicator(cfg, false);
  } else if (name == "replicator-random-cost") {
    run = run_replicator(cfg, true);
  } else if (name == "lowerbound") {
    run = run_lowerbound(cfg);
  } else if (name == "mixing-report") {
    run = run_mixing_report(cfg);
  } else {
    run = run_custom(cfg);
  }
  run.experiment = name;
  run.seed = static_cast<std::uint64_t>(cfg.GetInt("seed", 0));
  if (!run.policies.empty()) run.summary = summarize(run.policies);
  return run;
}

std::vector<std::string> write_experiment(const ExperimentRun& run,
                                          const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto open = [&](const std::string& file) {
    std::string path = (fs::path(dir) / file).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    written.push_back(path);
    return out;
  };
  for (const auto& r : run.policies) {
    {
      std::ofstream out = open(run.experiment + "_" + r.policy + ".csv");
      write_trajectory_csv(out, r.trajectory);
    }
    if (r.diagnostics) {
      std::ofstream out =
          open(run.experiment + "_" + r.policy + "_diagnostics.csv");
      write_diagnostics_csv(out, *r.diagnostics);
    }
  }
  for (const auto& [file, text] : run.tables) {
    std::ofstream out = open(file);
    out << text;
  }
  if (!run.summary.empty()) {
    std::ofstream out = open("summary.jsonl");
    for (const auto& s : run.summary) {
      nlohmann::ordered_json j;
      j["experiment"] = run.experiment;
      j["policy"] = s.policy;
      j["total_cost"] = s.total_cost;
      j["regret_vs_best"] = s.regret_vs_best;
      j["seed"] = run.seed;
      out << j.dump() << '\n';
    }
  }
  return written;
}

}  // namespace popctl
