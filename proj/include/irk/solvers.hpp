#ifndef IRK_SOLVERS_HPP
#define IRK_SOLVERS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irk/krylov.hpp"
#include "irk/operators.hpp"
#include "irk/projected.hpp"
#include "irk/regularization.hpp"
#include "irk/types.hpp"

namespace irk {

enum class Method {
  ir_fgmres,
  ir_flsqr,
  cir_fgmres,
  cir_flsqr,
  irw_fgmres,
  irw_flsqr,
  hybrid_fgmres,
  hybrid_flsqr,
  flexible_fgmres,
  flexible_flsqr,
  hybrid_gmres,
  hybrid_lsqr,
  irn_gmres,
  irn_lsqr,
  fista,
};

const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& name);
const std::vector<Method>& all_methods();

/// Arnoldi-based methods need a square operator.
bool needs_square_operator(Method m);
/// Krylov family used by a method (FISTA reports golub_kahan; unused).
KrylovKind krylov_kind(Method m);

enum class LambdaRuleKind { discrepancy, optimal, fixed };

struct LambdaRule {
  LambdaRuleKind kind = LambdaRuleKind::discrepancy;
  double value = 0.0;  // used by `fixed`

  static LambdaRule discrepancy() { return {LambdaRuleKind::discrepancy, 0.0}; }
  static LambdaRule optimal() { return {LambdaRuleKind::optimal, 0.0}; }
  static LambdaRule fixed(double v) { return {LambdaRuleKind::fixed, v}; }
};

struct SolverConfig {
  Method method = Method::ir_flsqr;
  double p = 1.0;
  /// Smoothing parameter of the weights; <= 0 selects 1e-4 * ||r0||_inf.
  double tau_smooth = 0.0;
  LambdaRule lambda_rule = LambdaRule::discrepancy();
  double tau_dp = 1.0;
  /// Tolerance of the lambda-stabilization restart test; <= 0 disables it.
  double restart_tol = 0.1;
  /// Cap on the number of search directions; 0 means unlimited.
  Index max_basis_vectors = 0;
  Index kmax = 100;
  /// Stop when the relative change of x stays below this for two
  /// consecutive iterations; 0 disables the test.
  double outer_tol = 1e-8;
  /// Known noise level ||e|| / ||b - e||, used by the discrepancy rule.
  double noise_level = 0.0;
  std::optional<Vector> x0;
  std::uint64_t seed = 0;
  CorrectionProjector projector = CorrectionProjector::image;
  /// Inner iteration cap of the inner-outer IRN methods when no basis cap is
  /// set.
  Index inner_max = 30;
  /// Use the monotone FISTA variant (objective never increases).
  bool fista_monotone = true;
  std::string label;
};

struct IterationRecord {
  Index iter = 0;
  Index outer = 0;
  double rel_error = 0.0;  // NaN when x_true is unknown
  double residual_norm = 0.0;
  double projected_residual_norm = 0.0;
  double lambda = 0.0;
  Index subspace_dim = 0;
  Index basis_columns = 0;
  bool restarted = false;
  bool corrected_fallback = false;
  bool dp_attained = false;
  /// ||Ax - b||^2 + lambda ||W(Lx) L x||^2 at the new iterate.
  double functional_T = 0.0;
  /// ||Ax - b||^2 + lambda ||W_k L x||^2 with the weights used to compute
  /// the iterate, at the new and at the previous iterate.
  double majorant_new = 0.0;
  double majorant_prev = 0.0;
  /// ||W_k L x_k||^2.
  double weighted_reg_sq = 0.0;
  /// ||Ax - b||^2 + lambda ||Lx||_p^p.
  double objective_lp = 0.0;
  /// ||Ax - b||^2 + lambda (2/p) sum((Lx)_i^2 + tau^2)^(p/2).
  double smoothed_objective = 0.0;
};

using RunHistory = std::vector<IterationRecord>;

enum class SolveStatus { max_iterations, converged, stagnated, breakdown, zero_residual };

const char* to_string(SolveStatus s);

struct SolveResult {
  Vector x;
  RunHistory history;
  SolveStatus status = SolveStatus::max_iterations;
  Index restarts = 0;
  Index peak_basis_columns = 0;
  double tau_smooth = 0.0;
};

/// Problem data shared by all solvers. References must outlive the call.
struct SolveInput {
  const LinearOperator& A;
  const Vector& b;
  const RegOperator& L;
  const Vector* x_true = nullptr;
};

/// Dispatches on config.method.
SolveResult solve(const SolverConfig& config, const SolveInput& in);

SolveResult solve_ir(const SolverConfig& config, const SolveInput& in);
SolveResult solve_cir(const SolverConfig& config, const SolveInput& in);
SolveResult solve_irw(const SolverConfig& config, const SolveInput& in);
SolveResult solve_hybrid_flexible(const SolverConfig& config, const SolveInput& in);
SolveResult solve_flexible(const SolverConfig& config, const SolveInput& in);
SolveResult solve_hybrid_standard(const SolverConfig& config, const SolveInput& in);
SolveResult solve_irn_inner_outer(const SolverConfig& config, const SolveInput& in);
SolveResult solve_fista(const SolverConfig& config, const SolveInput& in);

/// Restart test on the lambda values chosen since the last restart.
/// True when dim >= cap (cap > 0), or when tol > 0, at least three values
/// are available, the two older ones are positive, and both consecutive
/// relative differences are <= tol.
bool restart_criterion(const std::vector<double>& lambdas, double tol, Index dim = 0,
                       Index cap = 0);
/// Same test driven by a run history: uses the records after the most recent
/// restarted entry.
bool restart_criterion(const RunHistory& history, double tol, Index cap = 0);

/// ||Ax - b||^2 + lambda ||W(Lx) L x||^2 with smoothed weights of Lx.
double functional_T(const LinearOperator& A, const Vector& b, const RegOperator& L,
                    const Vector& x, double p, double tau_smooth, double lambda);
/// ||Ax - b||^2 + lambda ||W L x||^2 for externally supplied weights.
double functional_T(const LinearOperator& A, const Vector& b, const RegOperator& L,
                    const Vector& x, const WeightVector& w, double lambda);
/// ||Ax - b||^2 + lambda (2/p) sum((Lx)_i^2 + tau^2)^(p/2), the functional
/// majorized (up to a constant) by the weighted quadratic.
double smoothed_objective(const LinearOperator& A, const Vector& b, const RegOperator& L,
                          const Vector& x, double p, double tau_smooth, double lambda);
/// ||Ax - b||^2 + lambda ||Lx||_p^p.
double lp_objective(const LinearOperator& A, const Vector& b, const RegOperator& L,
                    const Vector& x, double p, double lambda);

/// Default smoothing parameter 1e-4 * ||r0||_inf (floored at 1e-12).
double default_tau_smooth(const Vector& r0);

struct MajorantSolution {
  Vector x;
  Index dim = 0;
  bool rank_deficient = false;
};

/// Minimizes ||Ax - b||^2 + lambda ||W L x||^2 over x_prev + range(Z) where
/// Z spans `dim` steps of the flexible decomposition built from
/// b - A x_prev with the fixed weights w (stops early on breakdown).
MajorantSolution solve_majorant_subproblem(const LinearOperator& A, const Vector& b,
                                           const RegOperator& L, const WeightVector& w,
                                           double lambda, const Vector& x_prev,
                                           Index dim, KrylovKind kind);

}  // namespace irk

#endif  // IRK_SOLVERS_HPP
