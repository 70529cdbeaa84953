#include "popctl/optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace popctl {

namespace {

double log_sum_exp(const Vec& z) {
  double m = z.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((z.array() - m).exp().sum());
}

Vec softmax(const Vec& z) {
  double m = z.maxCoeff();
  Vec e = (z.array() - m).exp();
  return e / e.sum();
}

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

void DacDomain::Check() const {
  if (H < 1) throw Error("history length H must be at least 1");
  if (control_dim < 1 || state_dim < 1) throw Error("empty dimensions");
  if (!(0.0 <= a0 && a0 <= a_ub && a_ub <= 1.0)) {
    throw Error("scale range must satisfy 0 <= a0 <= a_ub <= 1");
  }
}

DacParams DacParams::Zeros(const DacDomain& dom) {
  DacParams z;
  z.p = Vec::Zero(dom.control_dim);
  z.M.assign(dom.H, Mat::Zero(dom.control_dim, dom.state_dim));
  return z;
}

int DacParams::num_blocks() const {
  return 1 + static_cast<int>(M.size() * (M.empty() ? 0 : M[0].cols()));
}

Vec DacParams::block(int b) const {
  if (b == 0) return p;
  int cols = static_cast<int>(M[0].cols());
  return M[(b - 1) / cols].col((b - 1) % cols);
}

void DacParams::set_block(int b, const Vec& v) {
  if (b == 0) {
    p = v;
    return;
  }
  int cols = static_cast<int>(M[0].cols());
  M[(b - 1) / cols].col((b - 1) % cols) = v;
}

Vec DacParams::flat() const {
  long n = p.size();
  for (const auto& m : M) n += m.size();
  Vec out(n);
  out.head(p.size()) = p;
  long off = p.size();
  for (const auto& m : M) {
    out.segment(off, m.size()) = m.reshaped();
    off += m.size();
  }
  return out;
}

void DacParams::set_flat(const Vec& v) {
  p = v.head(p.size());
  long off = p.size();
  for (auto& m : M) {
    m.reshaped() = v.segment(off, m.size());
    off += m.size();
  }
}

DacParams& DacParams::operator+=(const DacParams& o) {
  p += o.p;
  for (size_t h = 0; h < M.size(); ++h) M[h] += o.M[h];
  return *this;
}

DacParams operator-(const DacParams& a, const DacParams& b) {
  DacParams out = a;
  out.p -= b.p;
  for (size_t h = 0; h < out.M.size(); ++h) out.M[h] -= b.M[h];
  return out;
}

DacParams operator*(double s, const DacParams& a) {
  DacParams out = a;
  out.p *= s;
  for (auto& m : out.M) m *= s;
  return out;
}

GradAccumulator::GradAccumulator(const DacDomain& dom)
    : sum_(DacParams::Zeros(dom)), comp_(Vec::Zero(sum_.flat().size())) {}

void GradAccumulator::Add(const DacParams& g) {
  Vec s = sum_.flat();
  Vec y = g.flat() - comp_;
  Vec t = s + y;
  comp_ = (t - s) - y;
  sum_.set_flat(t);
  ++count_;
}

double regularizer(const DacParams& params) {
  double r = 0.0;
  for (int b = 0; b < params.num_blocks(); ++b) {
    r -= sub_entropy(params.block(b));
  }
  return r;
}

double ftrl_objective(const DacParams& g, double eta, const DacParams& z) {
  return g.flat().dot(z.flat()) + regularizer(z) / eta;
}

DacParams max_entropy_point(const DacDomain& dom) {
  dom.Check();
  double d = dom.control_dim;
  double a = std::clamp(d / (d + 1.0), dom.a0, dom.a_ub);
  DacParams z = DacParams::Zeros(dom);
  z.p.setConstant(a / d);
  for (auto& m : z.M) m.setConstant(a / d);
  return z;
}

DacParams ftrl_argmin(const DacParams& g, double eta, const DacDomain& dom) {
  dom.Check();
  if (!(eta > 0)) throw Error("step size must be positive");
  const int n = dom.num_blocks();
  // For a fixed scale a each block is a * softmax(-eta g_b), with value
  // (1/eta) [-a LSE_b + a ln a + (1-a) ln(1-a)]. Summing over blocks and
  // setting the derivative in a to zero gives logit(a) = mean_b LSE_b; the
  // objective is convex in a, so clamping to [a0, a_ub] is optimal.
  DacParams z = DacParams::Zeros(dom);
  double lse_mean = 0.0;
  for (int b = 0; b < n; ++b) {
    Vec logits = -eta * g.block(b);
    lse_mean += log_sum_exp(logits) / n;
    z.set_block(b, softmax(logits));
  }
  double a = dom.fixed_scale() ? dom.a0
                               : std::clamp(logistic(lse_mean), dom.a0, dom.a_ub);
  return a * z;
}

LazyMD::LazyMD(const DacDomain& dom, double eta)
    : dom_(dom), eta_(eta), acc_(dom), current_(max_entropy_point(dom)) {
  if (!(eta > 0)) throw Error("step size must be positive");
}

const DacParams& LazyMD::Update(const DacParams& gradient) {
  acc_.Add(gradient);
  current_ = ftrl_argmin(acc_, eta_, dom_);
  return current_;
}

DacParams exp_weights_update(const DacParams& params, const DacParams& grad,
                             double eta, const DacDomain& dom) {
  if (!dom.fixed_scale()) {
    throw ScaleNotFixed("exponential weights need a0 == a_ub");
  }
  const double a = dom.a0;
  DacParams out = params;
  if (a == 0.0) return out;
  for (int b = 0; b < params.num_blocks(); ++b) {
    Vec logits = params.block(b).array().log().matrix() - eta * grad.block(b);
    out.set_block(b, a * softmax(logits));
  }
  return out;
}

double experiment_step_size(int d, int H, int T) {
  if (H < 2 || T < 1) throw Error("experiment step size needs H >= 2, T >= 1");
  return std::sqrt(d * H * std::log(static_cast<double>(H))) /
         (2.0 * std::sqrt(static_cast<double>(T)));
}

double theory_step_size(int d, int H, int T, double L, double tau, double c) {
  if (d < 2 || T < 2) throw Error("theory step size needs d >= 2, T >= 2");
  double lt = std::log(static_cast<double>(T));
  return c * std::sqrt(d * H * std::log(static_cast<double>(d))) /
         (L * tau * tau * lt * lt * std::sqrt(static_cast<double>(T)));
}

double lazy_md_step_size(int d, int H, int T, double L) {
  if (d < 2 || T < 1) throw Error("step size needs d >= 2, T >= 1");
  return std::sqrt(2.0 * d * H * std::log(static_cast<double>(d))) /
         (L * std::sqrt(static_cast<double>(T)));
}

}  // namespace popctl
