#ifndef IRK_PROJECTED_HPP
#define IRK_PROJECTED_HPP

#include "irk/types.hpp"

namespace irk {

/// Small dense problem  min_y ||T y - c||^2 + lambda ||R y - d||^2.
///
/// `c_perp` is the norm of the part of the full-space residual lying outside
/// the image basis; it is zero whenever the residual is in range(X), and is
/// added in quadrature to every reported residual norm.
struct ProjectedProblem {
  Matrix T;
  Vector c;
  Matrix R;
  Vector d;
  double c_perp = 0.0;

  Index dim() const { return T.cols(); }
};

struct QrFactors {
  Matrix Q;  // n x i, orthonormal columns
  Matrix R;  // i x i, upper triangular
};

/// Householder economic QR of a tall matrix (rows >= cols >= 1).
QrFactors economic_qr(const Matrix& b);

struct ProjectedSolution {
  Vector y;
  double residual_norm = 0.0;
  /// The stacked matrix [T; sqrt(lambda) R] was numerically rank deficient;
  /// y is then the minimum-norm least-squares solution.
  bool rank_deficient = false;
};

/// Reusable solver for one projected problem across many lambda values.
/// T is reduced once by QR; each solve factors the stacked triangular pair.
class TikhonovFamily {
 public:
  explicit TikhonovFamily(const ProjectedProblem& pp);

  ProjectedSolution solve(double lambda) const;
  double residual_norm(double lambda) const { return solve(lambda).residual_norm; }
  double residual_norm(const Vector& y) const;
  Index dim() const { return rt_.cols(); }

  /// Precomputes an SVD of R_T R^{-1} so that solve_fast costs O(i^2) per
  /// lambda. Skipped when R is ill conditioned (condition number > 1e6).
  void enable_fast_path();
  /// Same minimizer as solve() through the SVD when it is available and
  /// lambda > 0; falls back to solve() otherwise.
  Vector solve_fast(double lambda) const;
  bool has_fast_path() const { return spectral_; }

 private:
  Matrix rt_;       // triangular factor of T
  Vector ct_;       // Q_T^T c
  double rest2_;    // ||c - Q_T Q_T^T c||^2 + c_perp^2
  Matrix r_;
  Vector d_;

  bool spectral_ = false;
  Matrix v_;      // right singular vectors of R_T R^{-1}
  Vector sigma_;  // its singular values
  Vector g_;      // U^T ct
  Vector h_;      // V^T d
};

ProjectedSolution solve_projected(const ProjectedProblem& pp, double lambda);

/// sqrt(||T y - c||^2 + c_perp^2).
double projected_residual_norm(const ProjectedProblem& pp, const Vector& y);

struct DiscrepancyResult {
  double lambda = 0.0;
  bool attained = false;
};

/// Smallest-gap lambda for  residual(lambda) / b_norm = nl * tau_dp.
///
/// The residual is nondecreasing in lambda, so the root is bracketed on
/// log10(lambda) in [-12, 12] and bisected (at most 200 steps). If the
/// target lies below residual(0) the result is (0, false); if it lies above
/// residual(1e12) the result is (1e12, false).
DiscrepancyResult discrepancy_lambda(const ProjectedProblem& pp, double b_norm,
                                     double nl, double tau_dp);

struct OptimalLambdaResult {
  double lambda = 0.0;
  double error = 0.0;
  /// The error is flat over the search grid.
  bool degenerate = false;
};

/// argmin over lambda of ||x_prev + Z y(lambda) - x_true||, by a 0.1-decade
/// grid on [1e-12, 1e12] plus lambda = 0, refined by golden-section search
/// around the best grid point.
OptimalLambdaResult optimal_lambda(const ProjectedProblem& pp, const Matrix& z,
                                   const Vector& x_prev, const Vector& x_true);

inline constexpr double kLambdaMin = 1e-12;
inline constexpr double kLambdaMax = 1e12;

}  // namespace irk

#endif  // IRK_PROJECTED_HPP
