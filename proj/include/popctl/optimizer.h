#pragma once

#include <vector>

#include "popctl/simplex.h"

namespace popctl {

// Domain of the learnable pair (p, M^[1:H]): p in a * simplex over controls,
// each M^[h] a control_dim x state_dim matrix whose columns lie in
// a * simplex, with one shared scale a in [a0, a_ub].
struct DacDomain {
  int control_dim = 0;
  int state_dim = 0;
  int H = 1;
  double a0 = 1.0;
  double a_ub = 1.0;

  // p plus one block per column of every M^[h].
  int num_blocks() const { return 1 + H * state_dim; }
  bool fixed_scale() const { return a0 == a_ub; }
  void Check() const;
};

// Parameters (p, M^[1:H]). The same shape carries ambient gradients.
struct DacParams {
  Vec p;
  std::vector<Mat> M;

  static DacParams Zeros(const DacDomain& dom);
  double scale() const { return p.sum(); }
  // Block 0 is p; block 1 + h * state_dim + j is column j of M[h].
  Vec block(int b) const;
  void set_block(int b, const Vec& v);
  int num_blocks() const;
  // Flattened as p followed by each M[h] in column-major order.
  Vec flat() const;
  void set_flat(const Vec& v);
  DacParams& operator+=(const DacParams& o);
};

DacParams operator-(const DacParams& a, const DacParams& b);
DacParams operator*(double s, const DacParams& a);

// Compensated running sum of gradients.
class GradAccumulator {
 public:
  explicit GradAccumulator(const DacDomain& dom);

  void Add(const DacParams& g);
  const DacParams& sum() const { return sum_; }
  long count() const { return count_; }

 private:
  DacParams sum_;
  Vec comp_;
  long count_ = 0;
};

// -Ent(p) - sum_h sum_j Ent(M[h] column j).
double regularizer(const DacParams& params);

// <g, z> + R(z) / eta.
double ftrl_objective(const DacParams& g, double eta, const DacParams& z);

// Minimizer of the regularizer over the domain.
DacParams max_entropy_point(const DacDomain& dom);

// argmin_z <g, z> + R(z) / eta over the domain.
DacParams ftrl_argmin(const DacParams& g, double eta, const DacDomain& dom);
inline DacParams ftrl_argmin(const GradAccumulator& acc, double eta,
                             const DacDomain& dom) {
  return ftrl_argmin(acc.sum(), eta, dom);
}

// Follow-the-regularized-leader with the entropic regularizer above.
class LazyMD {
 public:
  LazyMD(const DacDomain& dom, double eta);

  const DacParams& current() const { return current_; }
  const GradAccumulator& accumulator() const { return acc_; }
  // Adds the gradient at the current iterate and returns the next iterate.
  const DacParams& Update(const DacParams& gradient);

 private:
  DacDomain dom_;
  double eta_;
  GradAccumulator acc_;
  DacParams current_;
};

// Multiplicative update with renormalization to the fixed scale.
// Throws ScaleNotFixed unless dom.a0 == dom.a_ub.
DacParams exp_weights_update(const DacParams& params, const DacParams& grad,
                             double eta, const DacDomain& dom);

// sqrt(d H ln H) / (2 sqrt(T)).
double experiment_step_size(int d, int H, int T);
// c sqrt(d H ln d) / (L tau^2 ln^2(T) sqrt(T)).
double theory_step_size(int d, int H, int T, double L, double tau,
                        double c = 1.0);
// sqrt(2 d H ln d) / (L sqrt(T)); the rate behind the regret and movement
// bounds of LazyMD.
double lazy_md_step_size(int d, int H, int T, double L);

}  // namespace popctl
