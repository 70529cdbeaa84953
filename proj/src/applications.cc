#include "popctl/applications.h"

#include <algorithm>
#include <cmath>
#include <functional>

namespace popctl {

Vec sir_transition(const Vec& x, const Vec& u, const SirParams& p) {
  const double s = x[0], i = x[1], r = x[2];
  const double contact = p.beta * i * s;
  Vec out(3);
  out[0] = (1.0 - p.beta * i) * s + p.xi * r + contact * u[0];
  out[1] = (1.0 - p.theta) * i + contact * u[1];
  out[2] = p.theta * i + (1.0 - p.xi) * r;
  return out;
}

Dynamics sir_dynamics(const SirParams& params) {
  return Dynamics::General(3, 2, [params](const Vec& x, const Vec& u) {
    return sir_transition(x, u, params);
  });
}

double sir_cost(const Vec& x, const Vec& u, double c2, double c3) {
  return c3 * x[1] * x[1] + c2 * x[0] * u[0];
}

Cost make_sir_cost(double c2, double c3) {
  Cost c;
  c.value = [c2, c3](const Vec& x, const Vec& u) {
    return sir_cost(x, u, c2, c3);
  };
  c.gradient = [c2, c3](const Vec& x, const Vec& u, Vec* gx, Vec* gu) {
    *gx = Vec::Zero(x.size());
    *gu = Vec::Zero(u.size());
    (*gx)[0] = c2 * u[0];
    (*gx)[1] = 2.0 * c3 * x[1];
    (*gu)[0] = c2 * x[0];
  };
  return c;
}

double lambert_w0(double x) {
  constexpr double kBranch = -0.36787944117144233;  // -1/e
  if (std::isnan(x)) throw DomainError("lambert_w0 of NaN");
  if (x < kBranch) {
    if (x > kBranch - 1e-15) return -1.0;
    throw DomainError("lambert_w0 argument below -1/e");
  }
  if (x == 0.0) return 0.0;
  if (x == kBranch) return -1.0;

  double w;
  if (x < -0.25) {
    double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    w = std::log1p(x);
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  for (int it = 0; it < 50; ++it) {
    double ew = std::exp(w);
    double f = w * ew - x;
    if (std::abs(f) <= tol * 1e-2) break;
    double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

double s_infinity(double s, double i, double sigma0) {
  return lambert_w0(-sigma0 * i * std::exp(-sigma0 * (s + i))) / sigma0;
}

double hospital_cost(const Vec& x, const Vec& u,
                     const HospitalCostParams& p) {
  const double gap = x[1] - p.y_max;
  return -s_infinity(x[0], x[1], p.sigma0) + p.c2 * u[0] * u[0] +
         p.c3 * gap / (1.0 + std::exp(-100.0 * gap));
}

Cost make_hospital_cost(const HospitalCostParams& params) {
  Cost c;
  c.value = [params](const Vec& x, const Vec& u) {
    return hospital_cost(x, u, params);
  };
  return c;
}

Mat rps_payoff(const Vec& u) {
  Mat m(3, 3);
  m << 0.0, u[0], -u[2],
       -u[0], 0.0, u[1],
       u[2], -u[1], 0.0;
  return m;
}

Vec replicator_transition(const Vec& x, const Vec& u, const RpsParams& p) {
  Vec fitness = rps_payoff(u) * x;
  return x + p.evolution_rate * x.cwiseProduct(fitness);
}

Dynamics replicator_dynamics(const RpsParams& params) {
  return Dynamics::General(3, 3, [params](const Vec& x, const Vec& u) {
    return replicator_transition(x, u, params);
  });
}

Cost make_rock_cost() {
  Cost c;
  c.value = [](const Vec& x, const Vec&) { return x[0] * x[0]; };
  c.gradient = [](const Vec& x, const Vec& u, Vec* gx, Vec* gu) {
    *gx = Vec::Zero(x.size());
    *gu = Vec::Zero(u.size());
    (*gx)[0] = 2.0 * x[0];
  };
  return c;
}

Cost make_rock_scissors_cost() {
  Cost c;
  c.value = [](const Vec& x, const Vec& u) {
    return x[0] * x[0] + u[2] * u[2];
  };
  c.gradient = [](const Vec& x, const Vec& u, Vec* gx, Vec* gu) {
    *gx = Vec::Zero(x.size());
    *gu = Vec::Zero(u.size());
    (*gx)[0] = 2.0 * x[0];
    (*gu)[2] = 2.0 * u[2];
  };
  return c;
}

namespace {

// Visits every vector of k nonnegative integers summing to n, in
// lexicographic order.
void for_each_composition(int k, int n,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> parts(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == k - 1) {
      parts[pos] = left;
      fn(parts);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      parts[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, n);
}

}  // namespace

Vec best_response_control(const Vec& x, const Transition& f,
                          const Cost& prev_cost, int control_dim,
                          int grid_resolution) {
  const int k = control_dim;
  auto score = [&](const Vec& u) { return prev_cost(f(x, u), u); };

  Vec best;
  double best_val = 0.0;
  Vec u(k);
  for_each_composition(k, grid_resolution, [&](const std::vector<int>& c) {
    for (int i = 0; i < k; ++i) u[i] = static_cast<double>(c[i]) / grid_resolution;
    double v = score(u);
    if (best.size() == 0 || v < best_val) {
      best = u;
      best_val = v;
    }
  });

  // Offsets of spacing 1/(10 res) in a box of half-width 1/res around the
  // incumbent; the last coordinate absorbs the remainder.
  const int fine = 10 * grid_resolution;
  const Vec incumbent = best;
  std::vector<int> off(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int sum) {
    if (pos == k - 1) {
      off[pos] = -sum;
      if (std::abs(off[pos]) > 10) return;
      for (int i = 0; i < k; ++i) {
        u[i] = incumbent[i] + static_cast<double>(off[i]) / fine;
        if (u[i] < -1e-15) return;
        u[i] = std::max(0.0, u[i]);
      }
      double v = score(u);
      if (v < best_val) {
        best = u;
        best_val = v;
      }
      return;
    }
    for (int o = -10; o <= 10; ++o) {
      off[pos] = o;
      rec(pos + 1, sum + o);
    }
  };
  if (k >= 2) rec(0, 0);
  return best;
}

Vec BestResponseController::Act(int, const Vec& x) {
  if (!has_prev_) return uniform(control_dim_);
  return best_response_control(x, f_, prev_, control_dim_, res_);
}

std::vector<double> trailing_mean(const std::vector<double>& v, int window) {
  std::vector<double> out(v.size());
  for (size_t t = 0; t < v.size(); ++t) {
    size_t n = std::min<size_t>(t + 1, window);
    double s = 0.0;
    for (size_t j = t + 1 - n; j <= t; ++j) s += v[j];
    out[t] = s / n;
  }
  return out;
}

}  // namespace popctl
