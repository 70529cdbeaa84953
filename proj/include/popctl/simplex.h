#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace popctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Default tolerance for simplex and stochastic-matrix checks.
inline constexpr double kTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The specific failures named by the library. Each one is an Error.
struct InfeasibleControl : Error { using Error::Error; };
struct InvalidObservation : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct NegativeAddition : Error { using Error::Error; };
struct NoUniqueStationary : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ScaleNotFixed : Error { using Error::Error; };

// Set of admissible controls: union of alpha * simplex over
// alpha in [alpha_lb, alpha_ub].
struct ControlSet {
  double alpha_lb = 1.0;
  double alpha_ub = 1.0;

  bool Contains(const Vec& u, double tol = kTol) const;
};

double l1_norm(const Vec& v);

// Operator norm induced by l1, i.e. the largest column l1 norm.
double one_one_norm(const Mat& m);

enum class ViolationKind { kNone, kNegativeEntry, kSumMismatch, kScaleRange };

struct Violation {
  ViolationKind kind = ViolationKind::kNone;
  double magnitude = 0.0;
  // Offending entry (row) for negative entries, column for sum mismatches.
  int index = -1;

  bool ok() const { return kind == ViolationKind::kNone; }
  std::string Describe() const;
};

// Nonnegative entries summing to `scale`.
Violation validate_scaled_dist(const Vec& v, double scale, double tol = kTol);
inline Violation validate_dist(const Vec& v, double tol = kTol) {
  return validate_scaled_dist(v, 1.0, tol);
}
// Nonnegative entries summing to at most 1.
Violation validate_sub_dist(const Vec& v, double tol = kTol);
// Nonnegative entries, every column summing to `scale`.
Violation validate_scaled_stochastic(const Mat& m, double scale,
                                     double tol = kTol);
inline Violation validate_stochastic(const Mat& m, double tol = kTol) {
  return validate_scaled_stochastic(m, 1.0, tol);
}

// Clamps tiny negative entries and rescales to unit mass. Throws
// InvariantViolation if the input is further than `tol` from the simplex.
Vec repair_dist(const Vec& v, double tol = kTol);

// Ent(v) = v_c ln(1/v_c) + sum_j v_j ln(1/v_j), with v_c = 1 - sum(v) and
// 0 ln(1/0) = 0.
double sub_entropy(const Vec& v);

Vec uniform(int d, double scale = 1.0);
Vec basis(int d, int j);

}  // namespace popctl
