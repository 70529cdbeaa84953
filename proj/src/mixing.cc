#include "popctl/mixing.h"

#include <algorithm>
#include <cmath>

namespace popctl {

namespace {

double max_column_spread(const Mat& p) {
  double worst = 0.0;
  for (int j = 0; j < p.cols(); ++j) {
    for (int k = j + 1; k < p.cols(); ++k) {
      worst = std::max(worst, (p.col(j) - p.col(k)).lpNorm<1>());
    }
  }
  return worst;
}

}  // namespace

Mat matrix_power(const Mat& x, long t) {
  Mat result = Mat::Identity(x.rows(), x.cols());
  Mat base = x;
  while (t > 0) {
    if (t & 1) result = result * base;
    t >>= 1;
    if (t > 0) base = base * base;
  }
  return result;
}

Vec stationary_distribution(const Mat& x, double tol, int max_iters) {
  Mat p = x;
  for (int it = 0; it <= max_iters; ++it) {
    if (max_column_spread(p) <= tol) {
      // The certificate holds; solve (X - I) pi = 0, <1, pi> = 1 for the
      // digits the power iteration leaves behind.
      const int d = static_cast<int>(x.rows());
      Mat sys(d + 1, d);
      sys.topRows(d) = x - Mat::Identity(d, d);
      sys.row(d).setOnes();
      Vec rhs = Vec::Zero(d + 1);
      rhs[d] = 1.0;
      Vec pi = sys.colPivHouseholderQr().solve(rhs);
      if (!pi.allFinite() || (pi - p.rowwise().mean()).lpNorm<1>() > 2 * tol) {
        pi = p.rowwise().mean();
      }
      pi = pi.cwiseMax(0.0);
      return pi / pi.sum();
    }
    p = p * p;
  }
  throw NoUniqueStationary("no unique stationary distribution");
}

double dist_to_stationarity(const Mat& x, const Vec& pi, long t) {
  Mat p = matrix_power(x, t);
  return (p.colwise() - pi).cwiseAbs().colwise().sum().maxCoeff();
}

double dist_to_stationarity(const Mat& x, long t) {
  return dist_to_stationarity(x, stationary_distribution(x), t);
}

double dbar(const Mat& x, long t) {
  Mat p = matrix_power(x, t);
  return max_column_spread(p);
}

long mixing_time(const Mat& x, double eps, long t_cap) {
  Vec pi;
  try {
    pi = stationary_distribution(x);
  } catch (const NoUniqueStationary&) {
    return kInfiniteTime;
  }
  Mat p = Mat::Identity(x.rows(), x.cols());
  for (long t = 0; t <= t_cap; ++t) {
    double d = (p.colwise() - pi).cwiseAbs().colwise().sum().maxCoeff();
    if (d <= eps && t >= 1) return t;
    p = x * p;
  }
  return kInfiniteTime;
}

Mat closed_loop(const Mat& a, const Mat& b, const Mat& k) {
  return (1.0 - one_one_norm(k)) * a + b * k;
}

bool tau_mixes(const Mat& a, const Mat& b, const Mat& k, double tau) {
  long cap = static_cast<long>(std::ceil(4.0 * tau)) + 1;
  long t = mixing_time(closed_loop(a, b, k), 0.25, cap);
  return t != kInfiniteTime && static_cast<double>(t) <= tau;
}

MixingProfile mixing_profile(const Mat& x, long t_max, long t_cap) {
  MixingProfile out;
  out.stationary = stationary_distribution(x);
  Mat p = Mat::Identity(x.rows(), x.cols());
  for (long t = 0; t <= t_max; ++t) {
    out.d_values[t] =
        (p.colwise() - out.stationary).cwiseAbs().colwise().sum().maxCoeff();
    out.dbar_values[t] = max_column_spread(p);
    p = x * p;
  }
  out.t_mix_quarter = mixing_time(x, 0.25, t_cap);
  return out;
}

}  // namespace popctl
