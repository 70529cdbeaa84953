#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "popctl/simplex.h"

namespace popctl {

// Per-step cost c_t(x, u). The gradient is optional; when it is absent,
// callers fall back to central differences.
struct Cost {
  std::function<double(const Vec& x, const Vec& u)> value;
  std::function<void(const Vec& x, const Vec& u, Vec* gx, Vec* gu)> gradient;

  double operator()(const Vec& x, const Vec& u) const { return value(x, u); }
};

Cost zero_cost();

// Gradient of c at (x, u), analytic if available.
void cost_gradient(const Cost& c, const Vec& x, const Vec& u, Vec* gx,
                   Vec* gu);

using Transition = std::function<Vec(const Vec& x, const Vec& u)>;

// Noiseless part of the update. For a simplex LDS this is
// (1 - sum(u)) A x + B u; a general system supplies f directly.
struct Dynamics {
  int state_dim = 0;
  int control_dim = 0;
  Transition bracket;
  // Populated only for linear systems.
  Mat A;
  Mat B;

  bool is_linear() const { return A.size() > 0; }

  static Dynamics Linear(const Mat& a, const Mat& b);
  static Dynamics General(int state_dim, int control_dim, Transition f);
};

// A simplex LDS (linear dynamics) or a general system (nonlinear f) together
// with its initial state and schedules. Index t-1 of each schedule holds the
// round-t entry.
struct System {
  Dynamics dynamics;
  ControlSet control_set;
  Vec x1;
  std::vector<double> gamma;
  std::vector<Vec> noise;
  std::vector<Cost> cost;
  // Lipschitz constant of the costs, supplied by the caller.
  double lipschitz = 1.0;

  int horizon() const { return static_cast<int>(cost.size()); }
};

// (1-gamma) [(1 - |u|_1) A x + B u] + gamma w.
Vec step(const Vec& x, const Vec& u, double gamma, const Vec& w, const Mat& a,
         const Mat& b);

// (1-gamma) f(x, u) + gamma w.
Vec step_general(const Transition& f, const Vec& x, const Vec& u,
                 double gamma, const Vec& w);

// Inverts one step for w. Returns zeros when gamma == 0.
Vec recover_perturbation(const Vec& x, const Vec& u, const Vec& x_next,
                         double gamma, const Dynamics& dyn);

struct Trajectory {
  std::vector<Vec> x;
  std::vector<Vec> u;
  std::vector<Vec> w;
  std::vector<double> gamma;
  std::vector<double> cost;
  std::vector<double> cum_cost;
  Vec final_state;

  int size() const { return static_cast<int>(cost.size()); }
  double total_cost() const { return cum_cost.empty() ? 0.0 : cum_cost.back(); }
};

// Online policy interface. Act is called with the current state; Observe
// then reveals the round's cost, the next state and gamma_t.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual Vec Act(int t, const Vec& x) = 0;
  virtual void Observe(int /*t*/, const Cost& /*cost*/, const Vec& /*x_next*/,
                       double /*gamma*/) {}
};

// Plays `controller` on `system` for T rounds. Throws InfeasibleControl for
// controls outside the control set.
Trajectory simulate(const System& system, Controller& controller, int T);

class LinearPolicy : public Controller {
 public:
  explicit LinearPolicy(Mat k, std::string name = "linear")
      : k_(std::move(k)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  Vec Act(int, const Vec& x) override { return k_ * x; }

 private:
  Mat k_;
  std::string name_;
};

Trajectory rollout_linear_policy(const System& system, const Mat& k, int T);

struct IngestedStep {
  Vec x;
  double gamma = 0.0;
  Vec w;
};

// Converts raw population counts into normalized states, gamma_t and w_t.
// counts has one more entry than controls.
std::vector<IngestedStep> ingest_counts(const std::vector<Vec>& counts,
                                        const std::vector<Vec>& controls,
                                        const Dynamics& dyn);

double regret(const Trajectory& traj,
              const std::vector<Trajectory>& comparators);

// Header t,x_1..x_d,u_1..u_k,gamma,cost,cum_cost with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

std::string format_double(double v);

}  // namespace popctl
