#include "popctl/simplex.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace popctl {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

Violation NegativeOrNone(const Vec& v, double tol) {
  Violation worst;
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] < -tol && -v[i] > worst.magnitude) {
      worst = {ViolationKind::kNegativeEntry, -v[i], i};
    }
  }
  return worst;
}

}  // namespace

bool ControlSet::Contains(const Vec& u, double tol) const {
  if (!NegativeOrNone(u, tol).ok()) return false;
  double a = u.sum();
  return a >= alpha_lb - tol && a <= alpha_ub + tol;
}

double l1_norm(const Vec& v) { return v.cwiseAbs().sum(); }

double one_one_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

std::string Violation::Describe() const {
  std::ostringstream os;
  switch (kind) {
    case ViolationKind::kNone:
      return "ok";
    case ViolationKind::kNegativeEntry:
      os << "negative entry at " << index << " of magnitude " << magnitude;
      break;
    case ViolationKind::kSumMismatch:
      os << "sum mismatch at column " << index << " of magnitude "
         << magnitude;
      break;
    case ViolationKind::kScaleRange:
      os << "scale outside range by " << magnitude;
      break;
  }
  return os.str();
}

Violation validate_scaled_dist(const Vec& v, double scale, double tol) {
  Violation neg = NegativeOrNone(v, tol);
  if (!neg.ok()) return neg;
  double gap = std::abs(v.sum() - scale);
  if (gap > tol) return {ViolationKind::kSumMismatch, gap, 0};
  return {};
}

Violation validate_sub_dist(const Vec& v, double tol) {
  Violation neg = NegativeOrNone(v, tol);
  if (!neg.ok()) return neg;
  double excess = v.sum() - 1.0;
  if (excess > tol) return {ViolationKind::kSumMismatch, excess, 0};
  return {};
}

Violation validate_scaled_stochastic(const Mat& m, double scale, double tol) {
  Violation worst;
  for (int j = 0; j < m.cols(); ++j) {
    Violation col = validate_scaled_dist(m.col(j), scale, tol);
    if (col.ok()) continue;
    if (col.kind == ViolationKind::kSumMismatch) col.index = j;
    if (col.magnitude > worst.magnitude) worst = col;
  }
  return worst;
}

Vec repair_dist(const Vec& v, double tol) {
  Violation bad = validate_dist(v, tol);
  if (!bad.ok()) throw InvariantViolation("state left the simplex: " +
                                          bad.Describe());
  Vec out = v.cwiseMax(0.0);
  return out / out.sum();
}

double sub_entropy(const Vec& v) {
  double cmp = std::max(0.0, 1.0 - v.sum());
  double ent = -xlogx(cmp);
  for (int j = 0; j < v.size(); ++j) ent -= xlogx(v[j]);
  return ent;
}

Vec uniform(int d, double scale) { return Vec::Constant(d, scale / d); }

Vec basis(int d, int j) {
  Vec e = Vec::Zero(d);
  e[j] = 1.0;
  return e;
}

}  // namespace popctl
