#pragma once

#include <vector>

#include "popctl/optimizer.h"

// Reference formulas shared by the unit tests and the acceptance binary.
namespace popctl::oracle {

// gamma_s with the conventions gamma_0 = 1 and gamma_s = 0 for s < 0.
inline double gamma_of(const std::vector<double>& g, int s) {
  if (s < 0) return 0.0;
  if (s == 0) return 1.0;
  return g[s - 1];
}

inline Vec w_of(const std::vector<Vec>& w, const Vec& x1, int s) {
  if (s < 0) return Vec::Zero(x1.size());
  if (s == 0) return x1;
  return w[s - 1];
}

// u_t = lambda_0 p + sum_j lambda_j M^j w_{t-j} with the products written out.
inline Vec control(const DacParams& z, const std::vector<double>& g,
                   const std::vector<Vec>& w, const Vec& x1, int t) {
  const int H = static_cast<int>(z.M.size());
  double lambda0 = 1.0;
  for (int j = 1; j <= H; ++j) lambda0 *= 1 - gamma_of(g, t - j);
  Vec u = lambda0 * z.p;
  for (int i = 1; i <= H; ++i) {
    double l = gamma_of(g, t - i);
    for (int j = 1; j < i; ++j) l *= 1 - gamma_of(g, t - j);
    u += l * z.M[i - 1] * w_of(w, x1, t - i);
  }
  return u;
}

// x_t = sum_{s=0}^{t-1} Phi(t, s+1) [gamma_s w_s + (1 - gamma_s) B u_s] with
// Phi(t, r) = prod_{q=r}^{t-1} (1 - gamma_q)(1 - |u_q|_1) A^{t-r}.
inline Vec state(const DacParams& z, const Mat& a, const Mat& b,
                 const std::vector<double>& g, const std::vector<Vec>& w,
                 const Vec& x1, int t) {
  Vec x = Vec::Zero(x1.size());
  for (int s = 0; s < t; ++s) {
    Vec drive = gamma_of(g, s) * w_of(w, x1, s);
    if (s >= 1) drive += (1 - gamma_of(g, s)) * b * control(z, g, w, x1, s);
    double coeff = 1.0;
    for (int q = s + 1; q < t; ++q) {
      coeff *= (1 - gamma_of(g, q)) * (1 - control(z, g, w, x1, q).sum());
    }
    Mat power = Mat::Identity(a.rows(), a.cols());
    for (int k = 0; k < t - s - 1; ++k) power = a * power;
    x += coeff * power * drive;
  }
  return x;
}

}  // namespace popctl::oracle
