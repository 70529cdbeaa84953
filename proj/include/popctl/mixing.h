#pragma once

#include <limits>
#include <map>

#include "popctl/simplex.h"

namespace popctl {

// Sentinel for an infinite mixing time.
inline constexpr long kInfiniteTime = std::numeric_limits<long>::max();

// Stationary distribution of a column-stochastic matrix via repeated
// squaring. Throws NoUniqueStationary when the powers do not collapse to a
// rank-one matrix within `max_iters` squarings.
Vec stationary_distribution(const Mat& x, double tol = kTol,
                            int max_iters = 64);

// D_X(t) = max_j |X^t e_j - pi|_1.
double dist_to_stationarity(const Mat& x, long t);
// Same with a precomputed stationary distribution.
double dist_to_stationarity(const Mat& x, const Vec& pi, long t);

// Dbar_X(t) = max_{j,k} |X^t (e_j - e_k)|_1. Defined for every stochastic X.
double dbar(const Mat& x, long t);

// Smallest t with D_X(t) <= eps, or kInfiniteTime when not reached by t_cap
// or when X has no unique stationary distribution.
long mixing_time(const Mat& x, double eps = 0.25, long t_cap = 1000);

// (1 - |K|_{1->1}) A + B K.
Mat closed_loop(const Mat& a, const Mat& b, const Mat& k);

bool tau_mixes(const Mat& a, const Mat& b, const Mat& k, double tau);

struct MixingProfile {
  Vec stationary;
  std::map<long, double> d_values;
  std::map<long, double> dbar_values;
  long t_mix_quarter = kInfiniteTime;
};

// Tabulates D and Dbar for t = 0..t_max. Throws NoUniqueStationary.
MixingProfile mixing_profile(const Mat& x, long t_max, long t_cap = 1000);

Mat matrix_power(const Mat& x, long t);

}  // namespace popctl
