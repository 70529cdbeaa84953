#pragma once

#include <string>
#include <vector>

#include "popctl/dynamics.h"

namespace popctl {

// ---- controlled SIR -------------------------------------------------------

// State (S, I, R); control (prevention, no prevention).
struct SirParams {
  double beta = 0.5;
  double theta = 0.03;
  double xi = 0.005;
};

// Noiseless SIR update; the effective transmission rate is beta * u(2).
Vec sir_transition(const Vec& x, const Vec& u, const SirParams& params);
Dynamics sir_dynamics(const SirParams& params);

// c3 * I^2 + c2 * S * u(1).
double sir_cost(const Vec& x, const Vec& u, double c2, double c3);
Cost make_sir_cost(double c2, double c3);

// ---- hospital flows -------------------------------------------------------

struct HospitalCostParams {
  double c2 = 0.01;
  double c3 = 100.0;
  double y_max = 0.1;
  double sigma0 = 3.0;
};

// Principal branch of the Lambert W function. Throws DomainError below -1/e.
double lambert_w0(double x);

// Terminal susceptible fraction W0(-s0 I exp(-s0 (S + I))) / s0.
double s_infinity(double s, double i, double sigma0);

// -S_inf(S, I) + c2 u(1)^2 + c3 (I - y_max) / (1 + exp(-100 (I - y_max))).
double hospital_cost(const Vec& x, const Vec& u,
                     const HospitalCostParams& params);
Cost make_hospital_cost(const HospitalCostParams& params);

// ---- replicator dynamics --------------------------------------------------

struct RpsParams {
  double evolution_rate = 0.25;
};

// [[0, u1, -u3], [-u1, 0, u2], [u3, -u2, 0]].
Mat rps_payoff(const Vec& u);

// x_i + rate * x_i * (M(u) x)_i.
Vec replicator_transition(const Vec& x, const Vec& u, const RpsParams& params);
Dynamics replicator_dynamics(const RpsParams& params);

// x(1)^2, and x(1)^2 + u(3)^2.
Cost make_rock_cost();
Cost make_rock_scissors_cost();

// ---- baselines ------------------------------------------------------------

class ConstantController : public Controller {
 public:
  ConstantController(Vec u, std::string name)
      : u_(std::move(u)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  Vec Act(int, const Vec&) override { return u_; }

 private:
  Vec u_;
  std::string name_;
};

// argmin of prev_cost(f(x, u), u) over a lattice on the control simplex of
// spacing 1/grid_resolution, then one refinement pass at a ten times finer
// spacing around the incumbent. Ties keep the lexicographically first point.
Vec best_response_control(const Vec& x, const Transition& f,
                          const Cost& prev_cost, int control_dim,
                          int grid_resolution = 50);

// Plays the best response to the previous round's cost; uniform in round 1.
class BestResponseController : public Controller {
 public:
  BestResponseController(Transition f, int control_dim,
                         int grid_resolution = 50)
      : f_(std::move(f)), control_dim_(control_dim), res_(grid_resolution) {}
  std::string name() const override { return "best-response"; }
  Vec Act(int t, const Vec& x) override;
  void Observe(int, const Cost& cost, const Vec&, double) override {
    prev_ = cost;
    has_prev_ = true;
  }

 private:
  Transition f_;
  int control_dim_;
  int res_;
  Cost prev_;
  bool has_prev_ = false;
};

// Mean of the last min(t, window) entries ending at each t.
std::vector<double> trailing_mean(const std::vector<double>& v, int window);

}  // namespace popctl
