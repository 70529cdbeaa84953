#include "popctl/dynamics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace popctl {

namespace {

constexpr double kCostFdStep = 1e-6;

void check_control_magnitude(const Vec& u) {
  double most_negative = u.size() ? u.minCoeff() : 0.0;
  double mass = u.sum();
  if (most_negative < -kTol || mass > 1.0 + kTol) {
    throw InfeasibleControl("control is not a sub-distribution");
  }
}

}  // namespace

Cost zero_cost() {
  Cost c;
  c.value = [](const Vec&, const Vec&) { return 0.0; };
  c.gradient = [](const Vec& x, const Vec& u, Vec* gx, Vec* gu) {
    *gx = Vec::Zero(x.size());
    *gu = Vec::Zero(u.size());
  };
  return c;
}

void cost_gradient(const Cost& c, const Vec& x, const Vec& u, Vec* gx,
                   Vec* gu) {
  if (c.gradient) {
    c.gradient(x, u, gx, gu);
    return;
  }
  const double h = kCostFdStep;
  *gx = Vec::Zero(x.size());
  *gu = Vec::Zero(u.size());
  Vec xp = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    double hi = c.value(xp, u);
    xp[i] = x[i] - h;
    double lo = c.value(xp, u);
    xp[i] = x[i];
    (*gx)[i] = (hi - lo) / (2 * h);
  }
  Vec up = u;
  for (int i = 0; i < u.size(); ++i) {
    up[i] = u[i] + h;
    double hi = c.value(x, up);
    up[i] = u[i] - h;
    double lo = c.value(x, up);
    up[i] = u[i];
    (*gu)[i] = (hi - lo) / (2 * h);
  }
}

Dynamics Dynamics::Linear(const Mat& a, const Mat& b) {
  Dynamics d;
  d.state_dim = static_cast<int>(a.rows());
  d.control_dim = static_cast<int>(b.cols());
  d.A = a;
  d.B = b;
  d.bracket = [a, b](const Vec& x, const Vec& u) -> Vec {
    return (1.0 - u.sum()) * (a * x) + b * u;
  };
  return d;
}

Dynamics Dynamics::General(int state_dim, int control_dim, Transition f) {
  Dynamics d;
  d.state_dim = state_dim;
  d.control_dim = control_dim;
  d.bracket = std::move(f);
  return d;
}

Vec step(const Vec& x, const Vec& u, double gamma, const Vec& w, const Mat& a,
         const Mat& b) {
  check_control_magnitude(u);
  Vec inner = (1.0 - l1_norm(u)) * (a * x) + b * u;
  return repair_dist((1.0 - gamma) * inner + gamma * w);
}

Vec step_general(const Transition& f, const Vec& x, const Vec& u,
                 double gamma, const Vec& w) {
  check_control_magnitude(u);
  return repair_dist((1.0 - gamma) * f(x, u) + gamma * w);
}

Vec recover_perturbation(const Vec& x, const Vec& u, const Vec& x_next,
                         double gamma, const Dynamics& dyn) {
  if (gamma == 0.0) return Vec::Zero(x_next.size());
  Vec w = (x_next - (1.0 - gamma) * dyn.bracket(x, u)) / gamma;
  // Rounding in x_next is amplified by 1/gamma.
  double tol = kTol + 1e-14 / gamma;
  Violation bad = validate_dist(w, tol);
  if (!bad.ok()) {
    throw InvalidObservation("recovered perturbation is not a distribution: " +
                             bad.Describe());
  }
  Vec out = w.cwiseMax(0.0);
  return out / out.sum();
}

Trajectory simulate(const System& system, Controller& controller, int T) {
  const Dynamics& dyn = system.dynamics;
  Trajectory traj;
  Vec x = system.x1;
  double cum = 0.0;
  for (int t = 1; t <= T; ++t) {
    Vec u = controller.Act(t, x);
    if (!system.control_set.Contains(u)) {
      throw InfeasibleControl(controller.name() + " left the control set at t=" +
                              std::to_string(t));
    }
    const Cost& c = system.cost[t - 1];
    double cost = c(x, u);
    double gamma = system.gamma[t - 1];
    Vec x_next = step_general(dyn.bracket, x, u, gamma, system.noise[t - 1]);
    cum += cost;
    traj.x.push_back(x);
    traj.u.push_back(u);
    traj.w.push_back(gamma > 0 ? system.noise[t - 1]
                               : Vec::Zero(dyn.state_dim).eval());
    traj.gamma.push_back(gamma);
    traj.cost.push_back(cost);
    traj.cum_cost.push_back(cum);
    controller.Observe(t, c, x_next, gamma);
    x = x_next;
  }
  traj.final_state = x;
  return traj;
}

Trajectory rollout_linear_policy(const System& system, const Mat& k, int T) {
  double a = one_one_norm(k);
  const ControlSet& cs = system.control_set;
  if (a < cs.alpha_lb - kTol || a > cs.alpha_ub + kTol) {
    throw InfeasibleControl("policy scale outside the control set");
  }
  LinearPolicy policy(k);
  return simulate(system, policy, T);
}

std::vector<IngestedStep> ingest_counts(const std::vector<Vec>& counts,
                                        const std::vector<Vec>& controls,
                                        const Dynamics& dyn) {
  if (counts.size() != controls.size() + 1) {
    throw Error("ingest_counts needs one more count vector than controls");
  }
  std::vector<IngestedStep> out;
  for (size_t t = 0; t < controls.size(); ++t) {
    double n_now = counts[t].sum();
    double n_next = counts[t + 1].sum();
    if (n_now <= 0) throw Error("population must be positive");
    if (n_next < n_now) {
      throw NegativeAddition("population decreased at step " +
                             std::to_string(t + 1));
    }
    IngestedStep s;
    s.x = counts[t] / n_now;
    double added = n_next - n_now;
    s.gamma = added / n_next;
    if (added > 0) {
      s.w = (counts[t + 1] - n_now * dyn.bracket(s.x, controls[t])) / added;
    } else {
      s.w = Vec::Zero(counts[t].size());
    }
    out.push_back(std::move(s));
  }
  return out;
}

double regret(const Trajectory& traj,
              const std::vector<Trajectory>& comparators) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : comparators) best = std::min(best, c.total_cost());
  return traj.total_cost() - best;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  int dx = traj.x.empty() ? 0 : static_cast<int>(traj.x[0].size());
  int du = traj.u.empty() ? 0 : static_cast<int>(traj.u[0].size());
  os << "t";
  for (int i = 1; i <= dx; ++i) os << ",x_" << i;
  for (int i = 1; i <= du; ++i) os << ",u_" << i;
  os << ",gamma,cost,cum_cost\n";
  for (int t = 0; t < traj.size(); ++t) {
    os << t + 1;
    for (int i = 0; i < dx; ++i) os << ',' << format_double(traj.x[t][i]);
    for (int i = 0; i < du; ++i) os << ',' << format_double(traj.u[t][i]);
    os << ',' << format_double(traj.gamma[t]) << ','
       << format_double(traj.cost[t]) << ','
       << format_double(traj.cum_cost[t]) << '\n';
  }
}

}  // namespace popctl
