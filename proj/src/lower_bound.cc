#include "popctl/lower_bound.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "popctl/rng.h"

namespace popctl {

SimplexLowerBoundPair make_simplex_lower_bound(double beta, int T) {
  if (T % 2 != 0 || T < 2) throw Error("lower bound needs an even T >= 2");
  if (beta < 2.0) throw Error("lower bound needs beta >= 2");
  const double cap = beta / T;
  if (cap > 1.0) throw Error("lower bound needs beta <= T");
  const int half = T / 2;

  Cost active;
  active.value = [](const Vec& x, const Vec&) { return std::abs(x[1] - 0.5); };
  active.gradient = [](const Vec& x, const Vec& u, Vec* gx, Vec* gu) {
    *gx = Vec::Zero(x.size());
    *gu = Vec::Zero(u.size());
    double d = x[1] - 0.5;
    (*gx)[1] = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
  };

  SimplexLowerBoundPair pair;
  const Vec w[2] = {Vec::Constant(2, 0.5), basis(2, 0)};
  for (int b = 0; b < 2; ++b) {
    System& s = pair.system[b];
    s.dynamics = Dynamics::Linear(Mat::Identity(2, 2), Mat::Identity(2, 2));
    s.control_set = {0.0, cap};
    s.x1 = basis(2, 1);
    s.lipschitz = 1.0;
    for (int t = 1; t <= T; ++t) {
      s.gamma.push_back(t == half ? 0.5 : 0.0);
      s.noise.push_back(w[b]);
      s.cost.push_back(t > half ? active : zero_cost());
    }
  }
  pair.comparator[0] = Mat::Constant(2, 2, cap / 2.0);
  pair.comparator[1] = Mat::Zero(2, 2);
  return pair;
}

double ScalarLowerBound::perturbation(int t) const {
  return (branch == 1 && t == T / 2) ? -1.0 : 0.0;
}

double ScalarLowerBound::cost(int t, double x, double u) const {
  return t > T / 2 ? std::abs(x) + std::abs(u) : 0.0;
}

ScalarRollout rollout_scalar(const ScalarLowerBound& sys,
                             const ScalarPolicy& policy) {
  ScalarRollout out;
  double x = 1.0;
  for (int t = 1; t <= sys.T; ++t) {
    double u = policy(t, x);
    double c = sys.cost(t, x, u);
    out.x.push_back(x);
    out.u.push_back(u);
    out.cost.push_back(c);
    out.total_cost += c;
    x = x - (sys.beta / sys.T) * u + sys.perturbation(t);
    x = std::clamp(x, -sys.clip, sys.clip);
  }
  return out;
}

ScalarPolicy scalar_comparator(int branch) {
  if (branch == 0) return [](int, double x) { return x; };
  return [](int, double) { return 0.0; };
}

namespace {

template <typename TrialFn>
LowerBoundTable tabulate(const std::vector<int>& T_list, int trials,
                         std::uint64_t seed, const TrialFn& trial) {
  if (trials < 1) throw Error("harness needs at least one trial");
  LowerBoundTable table;
  for (int T : T_list) {
    Rng branches(seed, "lowerbound/branch/T=" + std::to_string(T));
    std::vector<double> regrets;
    LowerBoundRow row;
    for (int i = 0; i < trials; ++i) {
      int b = branches.bernoulli(0.5) ? 1 : 0;
      auto [cost, best] = trial(T, b);
      row.mean_cost += cost / trials;
      row.mean_best_comparator += best / trials;
      regrets.push_back(cost - best);
    }
    row.T = T;
    row.trials = trials;
    double mean = 0.0;
    for (double r : regrets) mean += r / trials;
    double var = 0.0;
    for (double r : regrets) var += (r - mean) * (r - mean) / trials;
    row.mean_regret = mean;
    row.stddev_regret = std::sqrt(var);
    row.regret_per_step = mean / T;
    table.rows.push_back(row);
  }
  // Fit on rows with positive regret only.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : table.rows) {
    if (r.mean_regret <= 0) continue;
    double lx = std::log(static_cast<double>(r.T));
    double ly = std::log(r.mean_regret);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n >= 2 && n * sxx - sx * sx > 0) {
    table.log_log_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return table;
}

}  // namespace

LowerBoundTable lower_bound_regret_harness(const ControllerFactory& factory,
                                           double beta,
                                           const std::vector<int>& T_list,
                                           int trials, std::uint64_t seed) {
  return tabulate(T_list, trials, seed, [&](int T, int b) {
    SimplexLowerBoundPair pair = make_simplex_lower_bound(beta, T);
    const System& sys = pair.system[b];
    std::unique_ptr<Controller> ctl = factory(sys, T, b);
    double cost = simulate(sys, *ctl, T).total_cost();
    double best = std::min(rollout_linear_policy(sys, pair.comparator[0], T).total_cost(),
                           rollout_linear_policy(sys, pair.comparator[1], T).total_cost());
    return std::make_pair(cost, best);
  });
}

LowerBoundTable scalar_lower_bound_regret_harness(
    const ScalarControllerFactory& factory, double beta,
    const std::vector<int>& T_list, int trials, std::uint64_t seed) {
  return tabulate(T_list, trials, seed, [&](int T, int b) {
    ScalarLowerBound sys{beta, T, b};
    double cost = rollout_scalar(sys, factory(sys)).total_cost;
    double best = std::min(rollout_scalar(sys, scalar_comparator(0)).total_cost,
                           rollout_scalar(sys, scalar_comparator(1)).total_cost);
    return std::make_pair(cost, best);
  });
}

}  // namespace popctl
