#include "popctl/controller.h"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace popctl {

LambdaWeights compute_lambdas(const std::vector<double>& recent, int H) {
  LambdaWeights lw;
  lw.lambda = Vec::Zero(H + 1);
  lw.lambda_bar = Vec::Zero(H);
  double survive = 1.0;
  for (int i = 1; i <= H; ++i) {
    double g = recent[i - 1];
    lw.lambda[i] = g * survive;
    survive *= 1.0 - g;
    lw.lambda_bar[i - 1] = survive;
  }
  // Equals 1 - sum_i lambda_i and stays nonnegative under rounding.
  lw.lambda[0] = survive;
  return lw;
}

Vec dac_control(const DacParams& params, const LambdaWeights& lambdas,
                const std::vector<Vec>& recent_w) {
  Vec u = lambdas.lambda[0] * params.p;
  for (size_t i = 1; i <= params.M.size(); ++i) {
    double l = lambdas.lambda[i];
    if (l != 0.0) u.noalias() += l * (params.M[i - 1] * recent_w[i - 1]);
  }
  return u;
}

void History::Push(double gamma, Vec w) {
  gamma_.push_back(gamma);
  w_.push_back(std::move(w));
}

double History::gamma_at(int s) const {
  if (s < 0) return 0.0;
  if (s == 0) return 1.0;
  return gamma_.at(s - 1);
}

const Vec& History::w_at(int s) const {
  if (s < 0) return zero_;
  if (s == 0) return x1_;
  return w_.at(s - 1);
}

const LambdaWeights& History::lambdas(int t, int H) const {
  if (t < 1 || t > size() + 1) throw Error("round outside the history");
  if (cache_H_ != H) {
    lambda_cache_.clear();
    cache_H_ = H;
  }
  while (static_cast<int>(lambda_cache_.size()) < t) {
    int s = static_cast<int>(lambda_cache_.size()) + 1;
    std::vector<double> recent(H);
    for (int i = 1; i <= H; ++i) recent[i - 1] = gamma_at(s - i);
    lambda_cache_.push_back(compute_lambdas(recent, H));
  }
  return lambda_cache_[t - 1];
}

Vec dac_control(const DacParams& params, const History& hist, int t) {
  const int H = static_cast<int>(params.M.size());
  const LambdaWeights& lw = hist.lambdas(t, H);
  Vec u = lw.lambda[0] * params.p;
  for (int i = 1; i <= H; ++i) {
    double l = lw.lambda[i];
    if (l != 0.0) u.noalias() += l * (params.M[i - 1] * hist.w_at(t - i));
  }
  return u;
}

std::vector<Vec> History::recent_w(int t, int H) const {
  std::vector<Vec> out(H);
  for (int i = 1; i <= H; ++i) out[i - 1] = w_at(t - i);
  return out;
}

std::pair<Vec, Vec> counterfactual_rollout(const DacParams& params,
                                           const Dynamics& dyn,
                                           const History& hist, int t) {
  Vec x = hist.x1();
  for (int s = 1; s < t; ++s) {
    Vec u = dac_control(params, hist, s);
    double g = hist.gamma_at(s);
    if (g == 0.0) {
      x = dyn.bracket(x, u);
    } else {
      x = (1.0 - g) * dyn.bracket(x, u) + g * hist.w_at(s);
    }
  }
  Vec u = dac_control(params, hist, t);
  return {x, u};
}

double proxy_loss(const DacParams& params, const Dynamics& dyn,
                  const Cost& cost, const History& hist, int t) {
  auto [x, u] = counterfactual_rollout(params, dyn, hist, t);
  return cost(x, u);
}

DacParams proxy_loss_gradient(const DacParams& params, const Dynamics& dyn,
                              const Cost& cost, const History& hist, int t,
                              double h) {
  Vec theta = params.flat();
  Vec grad(theta.size());
  DacParams probe = params;
  for (long i = 0; i < theta.size(); ++i) {
    double keep = theta[i];
    theta[i] = keep + h;
    probe.set_flat(theta);
    double hi = proxy_loss(probe, dyn, cost, hist, t);
    theta[i] = keep - h;
    probe.set_flat(theta);
    double lo = proxy_loss(probe, dyn, cost, hist, t);
    theta[i] = keep;
    grad[i] = (hi - lo) / (2.0 * h);
  }
  DacParams out = params;
  out.set_flat(grad);
  return out;
}

DacParams proxy_loss_gradient_exact(const DacParams& params,
                                    const Dynamics& dyn, const Cost& cost,
                                    const History& hist, int t) {
  if (!dyn.is_linear()) {
    throw Error("exact gradient is available for linear dynamics only");
  }
  const int H = static_cast<int>(params.M.size());
  const Mat& A = dyn.A;
  const Mat& B = dyn.B;

  std::vector<Vec> xs(t + 1), us(t + 1);
  xs[1] = hist.x1();
  for (int s = 1; s <= t; ++s) {
    us[s] = dac_control(params, hist, s);
    if (s < t) {
      double g = hist.gamma_at(s);
      xs[s + 1] = (1.0 - g) * dyn.bracket(xs[s], us[s]) + g * hist.w_at(s);
    }
  }

  DacParams grad = params;
  grad.p.setZero();
  for (auto& m : grad.M) m.setZero();
  auto add_control_grad = [&](int s, const Vec& gu) {
    const LambdaWeights& lw = hist.lambdas(s, H);
    grad.p += lw.lambda[0] * gu;
    for (int i = 1; i <= H; ++i) {
      double l = lw.lambda[i];
      if (l != 0.0) grad.M[i - 1] += l * gu * hist.w_at(s - i).transpose();
    }
  };

  Vec gx, gu;
  cost_gradient(cost, xs[t], us[t], &gx, &gu);
  add_control_grad(t, gu);
  Vec adj = gx;
  for (int s = t - 1; s >= 1; --s) {
    double keep = 1.0 - hist.gamma_at(s);
    Vec ax = A * xs[s];
    Vec adj_u = keep * (B.transpose() * adj -
                        Vec::Constant(us[s].size(), adj.dot(ax)));
    add_control_grad(s, adj_u);
    adj = keep * (1.0 - us[s].sum()) * (A.transpose() * adj);
  }
  return grad;
}

double choose_a0(double alpha_lb, double alpha_ub, double tau, long tau_A) {
  bool slow = tau_A == kInfiniteTime ||
              static_cast<double>(tau_A) > 4.0 * tau;
  double indicator = slow ? 1.0 : 0.0;
  return std::max(alpha_lb, std::min(alpha_ub, indicator / (96.0 * tau)));
}

int default_history_length(double tau, double L, int T) {
  double n = std::ceil(std::log2(2.0 * L * std::pow(static_cast<double>(T), 3)));
  return std::max(1, static_cast<int>(std::ceil(tau * std::max(1.0, n))));
}

GpcSimplex::GpcSimplex(Dynamics dyn, const ControlSet& control_set, Vec x1,
                       int T, double lipschitz, const GpcOptions& opts)
    : dyn_(std::move(dyn)), opts_(opts), hist_(x1), x_(std::move(x1)) {
  domain_.control_dim = dyn_.control_dim;
  domain_.state_dim = dyn_.state_dim;
  domain_.H = opts.H;
  domain_.a_ub = control_set.alpha_ub;
  if (control_set.alpha_lb == control_set.alpha_ub) {
    domain_.a0 = control_set.alpha_lb;
  } else if (dyn_.is_linear()) {
    long cap = std::max<long>(1000, static_cast<long>(std::ceil(10 * opts.tau)));
    long tau_a = mixing_time(dyn_.A, 0.25, cap);
    domain_.a0 = choose_a0(control_set.alpha_lb, control_set.alpha_ub,
                           opts.tau, tau_a);
  } else {
    domain_.a0 = control_set.alpha_lb;
  }
  domain_.Check();

  const int d = dyn_.state_dim;
  switch (opts.preset) {
    case StepSizePreset::kExperiment:
      eta_ = experiment_step_size(d, opts.H, T);
      break;
    case StepSizePreset::kTheory:
      eta_ = theory_step_size(d, opts.H, T, lipschitz, opts.tau, opts.theory_c);
      break;
    case StepSizePreset::kExplicit:
      eta_ = opts.eta;
      break;
  }
  if (!(eta_ > 0)) throw Error("step size must be positive");

  if (opts.method == MirrorMethod::kLazyMD) {
    lazy_ = std::make_unique<LazyMD>(domain_, eta_);
    params_ = lazy_->current();
  } else {
    if (!domain_.fixed_scale()) {
      throw ScaleNotFixed("exponential weights need a fixed control scale");
    }
    // Uniform initialization at the fixed scale.
    params_ = DacParams::Zeros(domain_);
    params_.p.setConstant(domain_.a0 / domain_.control_dim);
    for (auto& m : params_.M) m.setConstant(domain_.a0 / domain_.control_dim);
  }
}

Vec GpcSimplex::Act(int t, const Vec& x) {
  x_ = x;
  u_ = dac_control(params_, hist_, t);
  return u_;
}

void GpcSimplex::Observe(int t, const Cost& cost, const Vec& x_next,
                         double gamma) {
  hist_.Push(gamma, recover_perturbation(x_, u_, x_next, gamma, dyn_));

  diag_.proxy_loss.push_back(proxy_loss(params_, dyn_, cost, hist_, t));
  diag_.scale.push_back(params_.scale());
  diag_.p.push_back(params_.p);

  DacParams grad =
      opts_.gradient == GradientMethod::kExact
          ? proxy_loss_gradient_exact(params_, dyn_, cost, hist_, t)
          : proxy_loss_gradient(params_, dyn_, cost, hist_, t, opts_.fd_step);
  if (lazy_) {
    params_ = lazy_->Update(grad);
  } else {
    params_ = exp_weights_update(params_, grad, eta_, domain_);
  }
}

GpcRun gpc_simplex_run(const System& system, int T, const GpcOptions& opts) {
  // T = 0 still reports the domain and step size of a one-round run.
  GpcSimplex gpc(system.dynamics, system.control_set, system.x1,
                 std::max(T, 1), system.lipschitz, opts);
  GpcRun run;
  if (T > 0) run.trajectory = simulate(system, gpc, T);
  run.diagnostics = gpc.diagnostics();
  run.domain = gpc.domain();
  run.eta = gpc.eta();
  return run;
}

void write_diagnostics_csv(std::ostream& os, const GpcDiagnostics& diag) {
  int k = diag.p.empty() ? 0 : static_cast<int>(diag.p[0].size());
  os << "t,proxy_loss,param_scale";
  for (int i = 1; i <= k; ++i) os << ",p_" << i;
  os << '\n';
  for (size_t t = 0; t < diag.proxy_loss.size(); ++t) {
    os << t + 1 << ',' << format_double(diag.proxy_loss[t]) << ','
       << format_double(diag.scale[t]);
    for (int i = 0; i < k; ++i) os << ',' << format_double(diag.p[t][i]);
    os << '\n';
  }
}

}  // namespace popctl
