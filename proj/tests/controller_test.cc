#include "popctl/controller.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"

namespace popctl {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Vec random_dist(std::mt19937_64& gen, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = u(gen) + 1e-3;
  return v / v.sum();
}

Mat random_stochastic(std::mt19937_64& gen, int d) {
  Mat m(d, d);
  for (int j = 0; j < d; ++j) m.col(j) = random_dist(gen, d);
  return m;
}

DacDomain make_domain(int du, int dx, int H, double a0, double a_ub) {
  DacDomain dom;
  dom.control_dim = du;
  dom.state_dim = dx;
  dom.H = H;
  dom.a0 = a0;
  dom.a_ub = a_ub;
  return dom;
}

DacParams random_params(std::mt19937_64& gen, const DacDomain& dom, double a) {
  DacParams z = DacParams::Zeros(dom);
  for (int b = 0; b < z.num_blocks(); ++b) {
    z.set_block(b, a * random_dist(gen, dom.control_dim));
  }
  return z;
}

Cost linear_state_cost(const Vec& v) {
  Cost c;
  c.value = [v](const Vec& x, const Vec&) { return v.dot(x); };
  return c;
}

TEST(ComputeLambdas, Examples) {
  LambdaWeights lw = compute_lambdas({0, 0, 0}, 3);
  EXPECT_EQ(lw.lambda[0], 1.0);
  EXPECT_TRUE(lw.lambda.tail(3).isZero());

  lw = compute_lambdas({1, 0.3, 0.6}, 3);
  EXPECT_EQ(lw.lambda[1], 1.0);
  EXPECT_EQ(lw.lambda[0], 0.0);
  EXPECT_EQ(lw.lambda[2], 0.0);
  EXPECT_EQ(lw.lambda[3], 0.0);

  lw = compute_lambdas({0.5, 0.5, 0.5}, 3);
  EXPECT_EQ(lw.lambda, (Vec(4) << 0.125, 0.5, 0.25, 0.125).finished());
  EXPECT_EQ(lw.lambda_bar, (Vec(3) << 0.5, 0.25, 0.125).finished());
}

TEST(ComputeLambdas, NormalizedForArbitraryGammas) {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    int H = 1 + trial % 8;
    std::vector<double> g(H);
    for (double& x : g) x = trial % 3 == 0 ? std::round(unit(gen)) : unit(gen);
    LambdaWeights lw = compute_lambdas(g, H);
    EXPECT_NEAR(lw.lambda.sum(), 1.0, 1e-12);
    EXPECT_GE(lw.lambda.minCoeff(), 0.0);
    EXPECT_GE(lw.lambda_bar.minCoeff(), 0.0);
    EXPECT_LE(lw.lambda_bar.maxCoeff(), 1.0);
  }
}

TEST(History, Conventions) {
  History h(v2(0.2, 0.8));
  h.Push(0.3, v2(1, 0));
  EXPECT_EQ(h.gamma_at(0), 1.0);
  EXPECT_EQ(h.gamma_at(-2), 0.0);
  EXPECT_EQ(h.gamma_at(1), 0.3);
  EXPECT_EQ(h.w_at(0), v2(0.2, 0.8));
  EXPECT_TRUE(h.w_at(-1).isZero());
  EXPECT_EQ(h.w_at(1), v2(1, 0));
  EXPECT_EQ(h.recent_w(2, 3).size(), 3u);
  EXPECT_THROW(h.lambdas(3, 2), Error);
  // Round 1 sees gamma_0 = 1 only.
  EXPECT_EQ(h.lambdas(1, 2).lambda[1], 1.0);
}

TEST(DacControl, Examples) {
  DacDomain dom = make_domain(2, 2, 1, 1, 1);
  DacParams z = DacParams::Zeros(dom);
  z.p = v2(0.3, 0.7);
  z.M[0] = Mat::Identity(2, 2);
  LambdaWeights lw = compute_lambdas({0.5}, 1);
  Vec u = dac_control(z, lw, {v2(1, 0)});
  EXPECT_NEAR(u[0], 0.65, 1e-15);
  EXPECT_NEAR(u[1], 0.35, 1e-15);

  lw = compute_lambdas({0.0}, 1);
  EXPECT_EQ(dac_control(z, lw, {v2(1, 0)}), z.p);

  DacParams zero = DacParams::Zeros(make_domain(2, 2, 1, 0, 0));
  EXPECT_TRUE(dac_control(zero, compute_lambdas({0.4}, 1), {v2(1, 0)}).isZero());
}

TEST(CounterfactualRollout, FirstRoundAndNoiselessRegime) {
  std::mt19937_64 gen(42);
  DacDomain dom = make_domain(2, 2, 3, 1, 1);
  DacParams z = random_params(gen, dom, 1.0);
  Dynamics dyn = Dynamics::Linear(random_stochastic(gen, 2),
                                  random_stochastic(gen, 2));
  History h(v2(0.6, 0.4));
  auto [x1, u1] = counterfactual_rollout(z, dyn, h, 1);
  EXPECT_EQ(x1, v2(0.6, 0.4));
  EXPECT_TRUE(u1.isApprox(z.M[0] * v2(0.6, 0.4)));
  for (int s = 1; s <= 8; ++s) h.Push(0.0, Vec::Zero(2));
  for (int t = 2; t <= 9; ++t) {
    auto [x, u] = counterfactual_rollout(z, dyn, h, t);
    if (t <= 3) {
      EXPECT_TRUE(u.isApprox(z.M[t - 1] * v2(0.6, 0.4), 1e-15));
    } else {
      EXPECT_TRUE(u.isApprox(z.p, 1e-15));
    }
  }
}

TEST(CounterfactualRollout, AgreesWithUnrolledClosedForm) {
  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 4;
    const int H = 1 + trial % 4;
    const int T = 5 + trial % 16;
    Mat a = random_stochastic(gen, d);
    Mat b = random_stochastic(gen, d);
    Dynamics dyn = Dynamics::Linear(a, b);
    double scale = unit(gen);
    DacParams z = random_params(gen, make_domain(d, d, H, scale, scale), scale);
    Vec x1 = random_dist(gen, d);
    std::vector<double> g;
    std::vector<Vec> w;
    History h(x1);
    for (int s = 1; s < T; ++s) {
      g.push_back(unit(gen) < 0.4 ? unit(gen) : 0.0);
      w.push_back(g.back() > 0 ? random_dist(gen, d) : Vec::Zero(d));
      h.Push(g.back(), w.back());
    }
    for (int t = 1; t <= T; ++t) {
      auto [x, u] = counterfactual_rollout(z, dyn, h, t);
      Vec xo = oracle::state(z, a, b, g, w, x1, t);
      Vec uo = oracle::control(z, g, w, x1, t);
      worst = std::max(worst, (x - xo).cwiseAbs().maxCoeff());
      worst = std::max(worst, (u - uo).cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(CounterfactualRollout, TwoStateExample) {
  // A = B = I, H = 1, gamma_1 = 1/2, w_1 = (0, 1), uniform parameters.
  DacDomain dom = make_domain(2, 2, 1, 1, 1);
  DacParams z = max_entropy_point(dom);
  Dynamics dyn = Dynamics::Linear(Mat::Identity(2, 2), Mat::Identity(2, 2));
  History h(v2(1, 0));
  h.Push(0.5, v2(0, 1));
  h.Push(0.0, Vec::Zero(2));
  auto [x2, u2] = counterfactual_rollout(z, dyn, h, 2);
  // x_2 = 0.5 * B u_1 + 0.5 w_1 with u_1 = M x_1 = (0.5, 0.5).
  EXPECT_TRUE(x2.isApprox(v2(0.25, 0.75), 1e-15));
  EXPECT_TRUE(u2.isApprox(v2(0.5, 0.5), 1e-15));
  auto [x3, u3] = counterfactual_rollout(z, dyn, h, 3);
  EXPECT_TRUE(x3.isApprox(oracle::state(z, Mat::Identity(2, 2),
                                       Mat::Identity(2, 2), {0.5, 0.0},
                                       {v2(0, 1), Vec::Zero(2)}, v2(1, 0), 3),
                          1e-15));
}

TEST(ProxyLoss, Examples) {
  DacDomain dom = make_domain(2, 2, 2, 1, 1);
  DacParams z = DacParams::Zeros(dom);
  z.p = v2(1, 0);
  for (auto& m : z.M) m.setConstant(0.5);
  Dynamics dyn = Dynamics::Linear(Mat::Identity(2, 2), Mat::Identity(2, 2));
  History h(v2(0, 1));
  for (int s = 0; s < 6; ++s) h.Push(0.0, Vec::Zero(2));
  EXPECT_EQ(proxy_loss(z, dyn, zero_cost(), h, 5), 0.0);
  EXPECT_NEAR(proxy_loss(z, dyn, linear_state_cost(v2(1, 0)), h, 5), 1.0, 1e-15);
}

// Plays fixed parameters and records the history it observes.
class FrozenDac : public Controller {
 public:
  FrozenDac(DacParams z, Dynamics dyn, Vec x1)
      : z_(std::move(z)), dyn_(std::move(dyn)), hist_(std::move(x1)) {}
  std::string name() const override { return "frozen"; }
  Vec Act(int t, const Vec& x) override {
    x_ = x;
    u_ = dac_control(z_, hist_, t);
    return u_;
  }
  void Observe(int, const Cost&, const Vec& x_next, double gamma) override {
    hist_.Push(gamma, recover_perturbation(x_, u_, x_next, gamma, dyn_));
  }
  const History& history() const { return hist_; }

 private:
  DacParams z_;
  Dynamics dyn_;
  History hist_;
  Vec x_, u_;
};

TEST(ProxyLoss, ReplayConsistency) {
  std::mt19937_64 gen(44);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = 3, T = 25;
  Mat a = random_stochastic(gen, d), b = random_stochastic(gen, d);
  System sys;
  sys.dynamics = Dynamics::Linear(a, b);
  sys.control_set = {0.0, 1.0};
  sys.x1 = random_dist(gen, d);
  Vec target = random_dist(gen, d);
  Cost c;
  c.value = [target](const Vec& x, const Vec& u) {
    return (x - target).squaredNorm() + u.sum();
  };
  for (int t = 0; t < T; ++t) {
    sys.gamma.push_back(unit(gen) < 0.5 ? 0.3 * unit(gen) : 0.0);
    sys.noise.push_back(random_dist(gen, d));
    sys.cost.push_back(c);
  }
  DacParams z = random_params(gen, make_domain(d, d, 3, 0.4, 0.4), 0.4);
  FrozenDac ctl(z, sys.dynamics, sys.x1);
  Trajectory traj = simulate(sys, ctl, T);
  for (int t = 1; t <= T; ++t) {
    EXPECT_NEAR(proxy_loss(z, sys.dynamics, c, ctl.history(), t),
                traj.cost[t - 1], 1e-12);
  }
}

TEST(ProxyLossGradient, ConstantAndLinearCosts) {
  DacDomain dom = make_domain(2, 2, 2, 1, 1);
  DacParams z = max_entropy_point(dom);
  Dynamics dyn = Dynamics::Linear(Mat::Constant(2, 2, 0.5), Mat::Identity(2, 2));
  History h(v2(0.3, 0.7));
  for (int s = 0; s < 6; ++s) h.Push(0.0, Vec::Zero(2));
  Cost constant;
  constant.value = [](const Vec&, const Vec&) { return 4.2; };
  EXPECT_LE(proxy_loss_gradient(z, dyn, constant, h, 5).flat().cwiseAbs().maxCoeff(),
            1e-9);

  Vec v = v2(0.7, -1.3);
  Cost linear;
  linear.value = [v](const Vec&, const Vec& u) { return v.dot(u); };
  DacParams g = proxy_loss_gradient(z, dyn, linear, h, 5);
  EXPECT_NEAR(g.p[0], v[0], 1e-8);
  EXPECT_NEAR(g.p[1], v[1], 1e-8);
  for (const auto& m : g.M) EXPECT_LE(m.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ProxyLossGradient, SwapEquivariant) {
  Mat perm(2, 2);
  perm << 0, 1, 1, 0;
  Mat a(2, 2), b(2, 2);
  a << 0.8, 0.3, 0.2, 0.7;
  b << 0.6, 0.1, 0.4, 0.9;
  // The swapped system has matrices P A P and P B P.
  Dynamics dyn = Dynamics::Linear(a, b);
  Dynamics dyn_swapped = Dynamics::Linear(perm * a * perm, perm * b * perm);
  Cost c;
  c.value = [](const Vec& x, const Vec& u) {
    return x[0] * x[0] + x[1] * x[1] + 0.5 * u.squaredNorm();
  };
  std::mt19937_64 gen(45);
  DacDomain dom = make_domain(2, 2, 2, 0.6, 0.6);
  DacParams z = random_params(gen, dom, 0.6);
  DacParams zs = z;
  zs.p = perm * z.p;
  for (auto& m : zs.M) m = perm * m * perm;
  History h(v2(0.9, 0.1)), hs(v2(0.1, 0.9));
  for (int s = 0; s < 6; ++s) {
    Vec w = random_dist(gen, 2);
    h.Push(0.2, w);
    hs.Push(0.2, perm * w);
  }
  DacParams g = proxy_loss_gradient(z, dyn, c, h, 6);
  DacParams gs = proxy_loss_gradient(zs, dyn_swapped, c, hs, 6);
  EXPECT_LE((gs.p - perm * g.p).cwiseAbs().maxCoeff(), 1e-8);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE((gs.M[i] - perm * g.M[i] * perm).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ProxyLossGradient, FiniteDifferencesMatchExactSensitivities) {
  std::mt19937_64 gen(46);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 3, H = 1 + trial % 4, t = 3 + trial % 12;
    Dynamics dyn = Dynamics::Linear(random_stochastic(gen, d),
                                    random_stochastic(gen, d));
    Vec target = random_dist(gen, d);
    Vec weight = random_dist(gen, d);
    Cost c;
    c.value = [=](const Vec& x, const Vec& u) {
      return (x - target).squaredNorm() + weight.dot(u.cwiseProduct(u));
    };
    c.gradient = [=](const Vec& x, const Vec& u, Vec* gx, Vec* gu) {
      *gx = 2 * (x - target);
      *gu = 2 * weight.cwiseProduct(u);
    };
    double scale = 0.2 + 0.8 * unit(gen);
    DacParams z = random_params(gen, make_domain(d, d, H, scale, scale), scale);
    History h(random_dist(gen, d));
    for (int s = 1; s < t; ++s) {
      double g = unit(gen) < 0.5 ? unit(gen) : 0.0;
      h.Push(g, g > 0 ? random_dist(gen, d) : Vec::Zero(d));
    }
    Vec fd = proxy_loss_gradient(z, dyn, c, h, t).flat();
    Vec exact = proxy_loss_gradient_exact(z, dyn, c, h, t).flat();
    double rel = (fd - exact).norm() / std::max(exact.norm(), 1e-12);
    worst = std::max(worst, rel);
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(ProxyLossGradient, ExactNeedsLinearDynamics) {
  Dynamics dyn = Dynamics::General(2, 2, [](const Vec& x, const Vec&) { return x; });
  DacParams z = max_entropy_point(make_domain(2, 2, 1, 1, 1));
  History h(v2(0.5, 0.5));
  EXPECT_THROW(proxy_loss_gradient_exact(z, dyn, zero_cost(), h, 1), Error);
}

TEST(ChooseA0, Examples) {
  EXPECT_EQ(choose_a0(0.0, 1.0, 1.0, 3), 0.0);
  EXPECT_NEAR(choose_a0(0.0, 1.0, 1.0, 10), 1.0 / 96, 1e-15);
  EXPECT_EQ(choose_a0(0.05, 1.0, 1.0, 10), 0.05);
  EXPECT_NEAR(choose_a0(0.0, 1.0, 1.0, kInfiniteTime), 1.0 / 96, 1e-15);
  EXPECT_EQ(choose_a0(0.0, 0.001, 1.0, 10), 0.001);
}

TEST(DefaultHistoryLength, UsesBaseTwo) {
  // log2(2 * 1 * 100^3) = 20.93
  EXPECT_EQ(default_history_length(1.0, 1.0, 100), 21);
  EXPECT_EQ(default_history_length(2.0, 1.0, 100), 42);
}

System noisy_linear_system(std::mt19937_64& gen, int d, int T, ControlSet cs) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  System sys;
  sys.dynamics = Dynamics::Linear(random_stochastic(gen, d), random_stochastic(gen, d));
  sys.control_set = cs;
  sys.x1 = random_dist(gen, d);
  Vec target = random_dist(gen, d);
  Cost c;
  c.value = [target](const Vec& x, const Vec&) { return (x - target).lpNorm<1>(); };
  for (int t = 0; t < T; ++t) {
    sys.gamma.push_back(unit(gen) < 0.3 ? 0.2 * unit(gen) : 0.0);
    sys.noise.push_back(random_dist(gen, d));
    sys.cost.push_back(c);
  }
  return sys;
}

TEST(GpcSimplex, ZeroHorizonGivesEmptyTrajectory) {
  std::mt19937_64 gen(47);
  System sys = noisy_linear_system(gen, 2, 0, {1.0, 1.0});
  GpcRun run = gpc_simplex_run(sys, 0, GpcOptions{});
  EXPECT_EQ(run.trajectory.size(), 0);
  EXPECT_TRUE(run.diagnostics.proxy_loss.empty());
}

TEST(GpcSimplex, ControlsStayFeasible) {
  std::mt19937_64 gen(48);
  for (auto method : {MirrorMethod::kLazyMD, MirrorMethod::kExpWeights}) {
    ControlSet cs = method == MirrorMethod::kLazyMD ? ControlSet{0.1, 0.8}
                                                    : ControlSet{1.0, 1.0};
    System sys = noisy_linear_system(gen, 3, 60, cs);
    GpcOptions opts;
    opts.H = 3;
    opts.method = method;
    GpcRun run = gpc_simplex_run(sys, 60, opts);
    ASSERT_EQ(run.trajectory.size(), 60);
    for (int t = 0; t < 60; ++t) {
      double mass = run.trajectory.u[t].sum();
      EXPECT_GE(mass, run.domain.a0 - 1e-9);
      EXPECT_LE(mass, cs.alpha_ub + 1e-9);
      EXPECT_GE(run.trajectory.u[t].minCoeff(), -1e-12);
      EXPECT_TRUE(validate_dist(run.trajectory.x[t]).ok());
    }
  }
}

TEST(GpcSimplex, DomainAndStepSizeFollowTheOptions) {
  std::mt19937_64 gen(49);
  System sys = noisy_linear_system(gen, 3, 10, {0.0, 1.0});
  sys.dynamics = Dynamics::Linear(Mat::Identity(3, 3), Mat::Identity(3, 3));
  GpcOptions opts;
  opts.H = 4;
  GpcSimplex gpc(sys.dynamics, sys.control_set, sys.x1, 100, 1.0, opts);
  // The identity never mixes, so the lower scale is 1/96.
  EXPECT_NEAR(gpc.domain().a0, 1.0 / 96, 1e-15);
  EXPECT_NEAR(gpc.eta(), experiment_step_size(3, 4, 100), 1e-15);

  opts.preset = StepSizePreset::kExplicit;
  opts.eta = 0.25;
  GpcSimplex explicit_eta(sys.dynamics, sys.control_set, sys.x1, 100, 1.0, opts);
  EXPECT_EQ(explicit_eta.eta(), 0.25);

  opts.method = MirrorMethod::kExpWeights;
  EXPECT_THROW(GpcSimplex(sys.dynamics, sys.control_set, sys.x1, 100, 1.0, opts),
               ScaleNotFixed);
}

TEST(GpcSimplex, NoiselessControlsEqualP) {
  std::mt19937_64 gen(50);
  System sys = noisy_linear_system(gen, 2, 30, {1.0, 1.0});
  std::fill(sys.gamma.begin(), sys.gamma.end(), 0.0);
  GpcOptions opts;
  opts.H = 3;
  opts.method = MirrorMethod::kExpWeights;
  GpcRun run = gpc_simplex_run(sys, 30, opts);
  for (int t = 4; t <= 30; ++t) {
    EXPECT_LE((run.trajectory.u[t - 1] - run.diagnostics.p[t - 1]).cwiseAbs().maxCoeff(),
              1e-15);
  }
}

TEST(Diagnostics, CsvHeader) {
  GpcDiagnostics diag;
  diag.proxy_loss = {0.5};
  diag.scale = {1.0};
  diag.p = {v2(0.25, 0.75)};
  std::ostringstream os;
  write_diagnostics_csv(os, diag);
  EXPECT_EQ(os.str(), "t,proxy_loss,param_scale,p_1,p_2\n1,0.5,1,0.25,0.75\n");
}

}  // namespace
}  // namespace popctl
