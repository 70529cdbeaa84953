#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "popctl/dynamics.h"

namespace popctl {

// Two systems that coincide up to round T/2 and differ only in the
// perturbation injected there, plus one comparator policy tailored to each.
struct SimplexLowerBoundPair {
  System system[2];
  // pi^0 = (beta/T)(1/2, 1/2) and pi^1 = 0, as linear policies.
  Mat comparator[2];
};

// A = B = I_2, x_1 = (0, 1), controls of mass at most beta/T,
// gamma_t = 1/2 at t = T/2 only, w^0 = (1/2, 1/2), w^1 = (1, 0),
// c_t = |x(2) - 1/2| for t > T/2 and 0 before.
SimplexLowerBoundPair make_simplex_lower_bound(double beta, int T);

// Scalar system x_{t+1} = x_t - (beta/T) u_t + w_t with x_1 = 1,
// c_t = |x| + |u| for t > T/2. Branch 1 has w_{T/2} = -1; branch 0 has no
// perturbation.
struct ScalarLowerBound {
  double beta = 2.0;
  int T = 2;
  int branch = 0;
  // States are clipped to this magnitude.
  double clip = 1e6;

  double perturbation(int t) const;
  double cost(int t, double x, double u) const;
};

using ScalarPolicy = std::function<double(int t, double x)>;

struct ScalarRollout {
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> cost;
  double total_cost = 0.0;
};

ScalarRollout rollout_scalar(const ScalarLowerBound& sys,
                             const ScalarPolicy& policy);

// pi^0(x) = x and pi^1(x) = 0.
ScalarPolicy scalar_comparator(int branch);

struct LowerBoundRow {
  int T = 0;
  double mean_cost = 0.0;
  double mean_best_comparator = 0.0;
  double mean_regret = 0.0;
  double stddev_regret = 0.0;
  int trials = 0;
  // mean_regret / T
  double regret_per_step = 0.0;
};

struct LowerBoundTable {
  std::vector<LowerBoundRow> rows;
  // Least-squares slope of log(mean regret) against log(T).
  double log_log_slope = 0.0;
};

// Builds a fresh controller for one trial of the simplex variant.
using ControllerFactory = std::function<std::unique_ptr<Controller>(
    const System& system, int T, int branch)>;

// For each T, averages over trials of (controller cost on the drawn branch)
// minus (best comparator cost on that branch). Branches are drawn uniformly
// from a stream derived from `seed`.
LowerBoundTable lower_bound_regret_harness(const ControllerFactory& factory,
                                           double beta,
                                           const std::vector<int>& T_list,
                                           int trials, std::uint64_t seed);

using ScalarControllerFactory =
    std::function<ScalarPolicy(const ScalarLowerBound& sys)>;

LowerBoundTable scalar_lower_bound_regret_harness(
    const ScalarControllerFactory& factory, double beta,
    const std::vector<int>& T_list, int trials, std::uint64_t seed);

}  // namespace popctl
