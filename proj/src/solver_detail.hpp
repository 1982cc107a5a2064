#ifndef IRK_SRC_SOLVER_DETAIL_HPP
#define IRK_SRC_SOLVER_DETAIL_HPP

#include "irk/solvers.hpp"

namespace irk::detail {

/// How the regularization term enters the projected problem.
enum class ProjectedReg {
  weighted_shift,  // ||W L (a + Z y)||^2 reduced by QR of W L Z
  identity,        // ||y||^2
};

/// Projected problem for  min ||A(a + Z y) - b||^2 + lambda * reg(y), given
/// the residual r_a = b - A a of the anchor a.
ProjectedProblem form_projected(const FlexibleDecomposition& state, const Vector& r_anchor,
                                const Vector& anchor, const WeightVector& w,
                                const RegOperator& L, ProjectedReg reg);

struct LambdaChoice {
  double lambda = 0.0;
  bool dp_attained = false;
};

LambdaChoice choose_lambda(const SolverConfig& config, const ProjectedProblem& pp,
                           const FlexibleDecomposition& state, const Vector& anchor,
                           const SolveInput& in, double b_norm);

/// Fills residual, error and functional values of a record for the new
/// iterate x (weights w were used to compute it from x_prev).
void fill_record(IterationRecord& rec, const SolveInput& in, const Vector& x,
                 const Vector& r, const Vector& x_prev, const WeightVector& w, double lambda,
                 double p, double tau_smooth);

/// Residual at rounding level relative to the data.
inline bool residual_vanished(const Vector& r, double b_norm) {
  return r.norm() <= 1e-14 * b_norm;
}

double relative_error_or_nan(const Vector& x, const Vector* x_true);

/// Two consecutive relative changes below tol.
class OuterStop {
 public:
  explicit OuterStop(double tol) : tol_(tol) {}
  bool update(const Vector& x_new, const Vector& x_old);

 private:
  double tol_;
  int hits_ = 0;
};

Vector initial_guess(const SolverConfig& config, Index n);
double resolve_tau(const SolverConfig& config, const Vector& r0);
void validate_common(const SolverConfig& config, const SolveInput& in);

}  // namespace irk::detail

#endif  // IRK_SRC_SOLVER_DETAIL_HPP
