#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "popctl/dynamics.h"
#include "popctl/mixing.h"
#include "popctl/optimizer.h"

namespace popctl {

struct LambdaWeights {
  // lambda[0..H]; lambda[0] multiplies p.
  Vec lambda;
  // lambda_bar[i-1] = prod_{j=1..i} (1 - gamma_{t-j}), i = 1..H.
  Vec lambda_bar;
};

// recent[i-1] = gamma_{t-i} for i = 1..H, with the caller applying
// gamma_0 = 1 and gamma_s = 0 for s < 0.
LambdaWeights compute_lambdas(const std::vector<double>& recent, int H);

// u = lambda_0 p + sum_i lambda_i M[i] w_{t-i}; recent_w[i-1] = w_{t-i}.
Vec dac_control(const DacParams& params, const LambdaWeights& lambdas,
                const std::vector<Vec>& recent_w);

// Observed gamma_s and w_s for s = 1..n, plus x_1.
// Out-of-range indices follow w_0 = x_1, gamma_0 = 1, w_s = 0 for s < 0.
class History {
 public:
  explicit History(Vec x1)
      : x1_(std::move(x1)), zero_(Vec::Zero(x1_.size())) {}

  void Push(double gamma, Vec w);
  int size() const { return static_cast<int>(gamma_.size()); }
  const Vec& x1() const { return x1_; }

  double gamma_at(int s) const;
  const Vec& w_at(int s) const;

  // Weights and recent perturbations for round t; needs gamma_{t-1}.
  const LambdaWeights& lambdas(int t, int H) const;
  std::vector<Vec> recent_w(int t, int H) const;

 private:
  Vec x1_;
  Vec zero_;
  std::vector<double> gamma_;
  std::vector<Vec> w_;
  // lambdas(t, H) never changes once gamma_{t-1} is known.
  mutable std::vector<LambdaWeights> lambda_cache_;
  mutable int cache_H_ = -1;
};

// dac_control for round t, reading perturbations from the history.
Vec dac_control(const DacParams& params, const History& hist, int t);

// State and control at round t had (p, M) been played at every earlier
// round. Evaluated on ambient (possibly infeasible) parameters as well.
std::pair<Vec, Vec> counterfactual_rollout(const DacParams& params,
                                           const Dynamics& dyn,
                                           const History& hist, int t);

double proxy_loss(const DacParams& params, const Dynamics& dyn,
                  const Cost& cost, const History& hist, int t);

// Central differences with step h on every coordinate of (p, M).
DacParams proxy_loss_gradient(const DacParams& params, const Dynamics& dyn,
                              const Cost& cost, const History& hist, int t,
                              double h = 1e-6);

// Reverse-mode sensitivity propagation; linear dynamics only.
DacParams proxy_loss_gradient_exact(const DacParams& params,
                                    const Dynamics& dyn, const Cost& cost,
                                    const History& hist, int t);

// max{alpha_lb, min{alpha_ub, 1[tau_A > 4 tau] / (96 tau)}}.
double choose_a0(double alpha_lb, double alpha_ub, double tau, long tau_A);

// tau * ceil(log2(2 L T^3)).
int default_history_length(double tau, double L, int T);

enum class StepSizePreset { kExperiment, kTheory, kExplicit };
enum class MirrorMethod { kLazyMD, kExpWeights };
enum class GradientMethod { kFiniteDifference, kExact };

struct GpcOptions {
  int H = 5;
  StepSizePreset preset = StepSizePreset::kExperiment;
  // Used when preset == kExplicit.
  double eta = 0.0;
  // Constant of the theory preset.
  double theory_c = 1.0;
  // Mixing-time bound of the comparator class.
  double tau = 1.0;
  MirrorMethod method = MirrorMethod::kLazyMD;
  GradientMethod gradient = GradientMethod::kFiniteDifference;
  double fd_step = 1e-6;
};

struct GpcDiagnostics {
  std::vector<double> proxy_loss;
  std::vector<double> scale;
  std::vector<Vec> p;
};

class GpcSimplex : public Controller {
 public:
  GpcSimplex(Dynamics dyn, const ControlSet& control_set, Vec x1, int T,
             double lipschitz, const GpcOptions& opts);

  std::string name() const override { return "gpc-simplex"; }
  Vec Act(int t, const Vec& x) override;
  void Observe(int t, const Cost& cost, const Vec& x_next,
               double gamma) override;

  const DacParams& params() const { return params_; }
  const DacDomain& domain() const { return domain_; }
  double eta() const { return eta_; }
  const History& history() const { return hist_; }
  const GpcDiagnostics& diagnostics() const { return diag_; }

 private:
  Dynamics dyn_;
  GpcOptions opts_;
  DacDomain domain_;
  double eta_ = 0.0;
  DacParams params_;
  std::unique_ptr<LazyMD> lazy_;
  History hist_;
  Vec x_;
  Vec u_;
  GpcDiagnostics diag_;
};

struct GpcRun {
  Trajectory trajectory;
  GpcDiagnostics diagnostics;
  DacDomain domain;
  double eta = 0.0;
};

GpcRun gpc_simplex_run(const System& system, int T, const GpcOptions& opts);

// Header t,proxy_loss,param_scale,p_1..p_k.
void write_diagnostics_csv(std::ostream& os, const GpcDiagnostics& diag);

}  // namespace popctl
