#include "irk/solvers.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "solver_detail.hpp"

namespace irk {

namespace {

struct MethodInfo {
  Method method;
  const char* name;
};

constexpr std::array<MethodInfo, 15> kMethods{{
    {Method::ir_fgmres, "ir_fgmres"},
    {Method::ir_flsqr, "ir_flsqr"},
    {Method::cir_fgmres, "cir_fgmres"},
    {Method::cir_flsqr, "cir_flsqr"},
    {Method::irw_fgmres, "irw_fgmres"},
    {Method::irw_flsqr, "irw_flsqr"},
    {Method::hybrid_fgmres, "hybrid_fgmres"},
    {Method::hybrid_flsqr, "hybrid_flsqr"},
    {Method::flexible_fgmres, "flexible_fgmres"},
    {Method::flexible_flsqr, "flexible_flsqr"},
    {Method::hybrid_gmres, "hybrid_gmres"},
    {Method::hybrid_lsqr, "hybrid_lsqr"},
    {Method::irn_gmres, "irn_gmres"},
    {Method::irn_lsqr, "irn_lsqr"},
    {Method::fista, "fista"},
}};

}  // namespace

const char* to_string(Method m) {
  for (const auto& info : kMethods) {
    if (info.method == m) return info.name;
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  for (const auto& info : kMethods) {
    if (name == info.name) return info.method;
  }
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& info : kMethods) out.push_back(info.method);
    return out;
  }();
  return methods;
}

bool needs_square_operator(Method m) {
  switch (m) {
    case Method::ir_fgmres:
    case Method::cir_fgmres:
    case Method::irw_fgmres:
    case Method::hybrid_fgmres:
    case Method::flexible_fgmres:
    case Method::hybrid_gmres:
    case Method::irn_gmres:
      return true;
    default:
      return false;
  }
}

KrylovKind krylov_kind(Method m) {
  return needs_square_operator(m) ? KrylovKind::arnoldi : KrylovKind::golub_kahan;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::converged: return "converged";
    case SolveStatus::stagnated: return "stagnated";
    case SolveStatus::breakdown: return "breakdown";
    case SolveStatus::zero_residual: return "zero_residual";
  }
  return "unknown";
}

bool restart_criterion(const std::vector<double>& lambdas, double tol, Index dim, Index cap) {
  if (cap > 0 && dim >= cap) return true;
  if (!(tol > 0.0) || lambdas.size() < 3) return false;
  const std::size_t k = lambdas.size() - 1;
  const double l0 = lambdas[k];
  const double l1 = lambdas[k - 1];
  const double l2 = lambdas[k - 2];
  if (!(l1 > 0.0) || !(l2 > 0.0)) return false;
  return std::abs(l0 - l1) / l1 <= tol && std::abs(l1 - l2) / l2 <= tol;
}

bool restart_criterion(const RunHistory& history, double tol, Index cap) {
  std::size_t start = 0;
  for (std::size_t j = history.size(); j-- > 0;) {
    if (history[j].restarted) {
      start = j;
      break;
    }
  }
  std::vector<double> lambdas;
  for (std::size_t j = start; j < history.size(); ++j) lambdas.push_back(history[j].lambda);
  const Index dim = history.empty() ? 0 : history.back().subspace_dim;
  return restart_criterion(lambdas, tol, dim, cap);
}

double functional_T(const LinearOperator& A, const Vector& b, const RegOperator& L,
                    const Vector& x, double p, double tau_smooth, double lambda) {
  const double fit = (A.apply(x) - b).squaredNorm();
  if (lambda == 0.0) return fit;
  const Vector v = L.apply(x);
  return fit + lambda * irn_weights(v, p, tau_smooth).w.cwiseProduct(v).squaredNorm();
}

double functional_T(const LinearOperator& A, const Vector& b, const RegOperator& L,
                    const Vector& x, const WeightVector& w, double lambda) {
  const double fit = (A.apply(x) - b).squaredNorm();
  if (lambda == 0.0) return fit;
  return fit + lambda * apply_weighted_reg(w, L, x).squaredNorm();
}

double smoothed_objective(const LinearOperator& A, const Vector& b, const RegOperator& L,
                          const Vector& x, double p, double tau_smooth, double lambda) {
  const double fit = (A.apply(x) - b).squaredNorm();
  const Vector v = L.apply(x);
  const double tau2 = tau_smooth * tau_smooth;
  double reg = 0.0;
  for (Index i = 0; i < v.size(); ++i) reg += std::pow(v[i] * v[i] + tau2, 0.5 * p);
  return fit + lambda * (2.0 / p) * reg;
}

double lp_objective(const LinearOperator& A, const Vector& b, const RegOperator& L,
                    const Vector& x, double p, double lambda) {
  const double fit = (A.apply(x) - b).squaredNorm();
  const Vector v = L.apply(x);
  double reg = 0.0;
  for (Index i = 0; i < v.size(); ++i) reg += std::pow(std::abs(v[i]), p);
  return fit + lambda * reg;
}

double default_tau_smooth(const Vector& r0) {
  return std::max(1e-4 * r0.lpNorm<Eigen::Infinity>(), 1e-12);
}

namespace detail {

ProjectedProblem form_projected(const FlexibleDecomposition& state, const Vector& r_anchor,
                                const Vector& anchor, const WeightVector& w,
                                const RegOperator& L, ProjectedReg reg) {
  const auto X = state.image_basis();
  const auto Z = state.Z();
  const Index i = Z.cols();
  ProjectedProblem pp;
  pp.T = state.projected_matrix();
  pp.c = X.transpose() * r_anchor;
  pp.c_perp = (r_anchor - X * pp.c).norm();
  if (reg == ProjectedReg::identity) {
    pp.R = Matrix::Identity(i, i);
    pp.d = Vector::Zero(i);
    return pp;
  }
  Matrix B(Z.rows(), i);
  for (Index j = 0; j < i; ++j) B.col(j) = apply_weighted_reg(w, L, Z.col(j));
  const QrFactors qr = economic_qr(B);
  pp.R = qr.R;
  pp.d = -(qr.Q.transpose() * apply_weighted_reg(w, L, anchor));
  return pp;
}

LambdaChoice choose_lambda(const SolverConfig& config, const ProjectedProblem& pp,
                           const FlexibleDecomposition& state, const Vector& anchor,
                           const SolveInput& in, double b_norm) {
  switch (config.lambda_rule.kind) {
    case LambdaRuleKind::fixed:
      return {config.lambda_rule.value, false};
    case LambdaRuleKind::discrepancy: {
      const DiscrepancyResult dp =
          discrepancy_lambda(pp, b_norm, config.noise_level, config.tau_dp);
      return {dp.lambda, dp.attained};
    }
    case LambdaRuleKind::optimal: {
      const Matrix z = state.Z();
      const OptimalLambdaResult opt = optimal_lambda(pp, z, anchor, *in.x_true);
      return {opt.lambda, false};
    }
  }
  return {};
}

double relative_error_or_nan(const Vector& x, const Vector* x_true) {
  if (x_true == nullptr) return std::numeric_limits<double>::quiet_NaN();
  const double denom = x_true->norm();
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (x - *x_true).norm() / denom;
}

void fill_record(IterationRecord& rec, const SolveInput& in, const Vector& x,
                 const Vector& r, const Vector& x_prev, const WeightVector& w, double lambda,
                 double p, double tau_smooth) {
  rec.lambda = lambda;
  rec.residual_norm = r.norm();
  rec.rel_error = relative_error_or_nan(x, in.x_true);
  const double fit = r.squaredNorm();
  const Vector v = in.L.apply(x);
  const double tau2 = tau_smooth * tau_smooth;
  double reg_T = 0.0;
  double reg_lp = 0.0;
  double reg_smooth = 0.0;
  const double e = (p - 2.0) / 2.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double s = v[i] * v[i] + tau2;
    reg_T += (s == 0.0 ? (e == 0.0 ? 1.0 : 0.0) : std::pow(s, e)) * v[i] * v[i];
    reg_lp += std::pow(std::abs(v[i]), p);
    reg_smooth += std::pow(s, 0.5 * p);
  }
  rec.functional_T = fit + lambda * reg_T;
  rec.objective_lp = fit + lambda * reg_lp;
  rec.smoothed_objective = fit + lambda * (2.0 / p) * reg_smooth;
  rec.weighted_reg_sq = apply_weighted_reg(w, in.L, x).squaredNorm();
  rec.majorant_new = fit + lambda * rec.weighted_reg_sq;
  rec.majorant_prev = functional_T(in.A, in.b, in.L, x_prev, w, lambda);
}

bool OuterStop::update(const Vector& x_new, const Vector& x_old) {
  if (!(tol_ > 0.0)) return false;
  const double denom = x_old.norm();
  if (denom == 0.0) {
    hits_ = 0;
    return false;
  }
  hits_ = (x_new - x_old).norm() / denom <= tol_ ? hits_ + 1 : 0;
  return hits_ >= 2;
}

Vector initial_guess(const SolverConfig& config, Index n) {
  if (!config.x0) return Vector::Zero(n);
  require_size(config.x0->size(), n, "initial guess x0");
  return *config.x0;
}

double resolve_tau(const SolverConfig& config, const Vector& r0) {
  return config.tau_smooth > 0.0 ? config.tau_smooth : default_tau_smooth(r0);
}

void validate_common(const SolverConfig& config, const SolveInput& in) {
  require_size(in.b.size(), in.A.rows(), "right-hand side b");
  require_size(in.L.size(), in.A.cols(), "regularization operator");
  if (in.x_true) require_size(in.x_true->size(), in.A.cols(), "x_true");
  if (!(config.p > 0.0) || config.p > 2.0) {
    throw std::invalid_argument("solver: p must lie in (0, 2]");
  }
  if (config.kmax < 1) throw std::invalid_argument("solver: kmax must be >= 1");
  if (config.max_basis_vectors < 0) {
    throw std::invalid_argument("solver: max_basis_vectors must be >= 0");
  }
  if (!(config.tau_dp > 0.0)) throw std::invalid_argument("solver: tau_dp must be > 0");
  if (config.lambda_rule.kind == LambdaRuleKind::fixed && !(config.lambda_rule.value >= 0.0)) {
    throw std::invalid_argument("solver: fixed lambda must be >= 0");
  }
  if (config.lambda_rule.kind == LambdaRuleKind::optimal && in.x_true == nullptr) {
    throw std::invalid_argument("solver: the optimal lambda rule needs x_true");
  }
  if (needs_square_operator(config.method) && !in.A.square()) {
    throw DimensionError(std::string(to_string(config.method)) +
                         " needs a square operator");
  }
}

}  // namespace detail

namespace {

using detail::ProjectedReg;

enum class Anchor {
  previous,  // x_k = x_{k-1} + Z y
  restart,   // x_k = x_restart + Z y (x0 before the first restart)
};

struct EngineOptions {
  ProjectedReg reg = ProjectedReg::weighted_shift;
  Anchor anchor = Anchor::previous;
  bool update_weights = true;
  bool zero_lambda = false;
  bool corrected = false;
  bool lambda_restarts = false;
  bool cap_restarts = true;
};

SolveResult run_engine(const SolverConfig& config, const SolveInput& in,
                       const EngineOptions& opt) {
  detail::validate_common(config, in);
  const KrylovKind kind = krylov_kind(config.method);
  const Index n = in.A.cols();
  const double b_norm = in.b.norm();
  if (b_norm == 0.0) throw std::invalid_argument("solver: b must be nonzero");

  SolveResult out;
  Vector x = detail::initial_guess(config, n);
  Vector r = in.b - in.A.apply(x);
  out.tau_smooth = detail::resolve_tau(config, r);
  out.x = x;
  if (detail::residual_vanished(r, b_norm)) {
    out.status = SolveStatus::zero_residual;
    return out;
  }

  const Index cap = config.max_basis_vectors;
  const bool can_restart = opt.lambda_restarts || (opt.cap_restarts && cap > 0);
  WeightVector w = unit_weights(n);
  std::unique_ptr<FlexibleDecomposition> state = plain_restart(r, kind, n);
  Vector anchor = x;
  Vector r_anchor = r;
  std::vector<double> lambdas;
  Index since_restart = 0;
  bool pending_restart = false;
  detail::OuterStop outer_stop(config.outer_tol);

  bool restarted = false;
  bool fallback = false;
  auto do_restart = [&]() {
    fallback = false;
    std::unique_ptr<FlexibleDecomposition> next;
    if (opt.corrected) {
      CorrectedRestart cr = corrected_restart(x, r, in.A, kind, 0, config.projector);
      next = std::move(cr.state);
      fallback = cr.failure != CorrectionFailure::none;
    }
    if (!next) next = plain_restart(r, kind, n);
    state = std::move(next);
    anchor = x;
    r_anchor = r;
    lambdas.clear();
    since_restart = 0;
    pending_restart = false;
    restarted = true;
    ++out.restarts;
  };

  for (Index k = 1; k <= config.kmax; ++k) {
    restarted = false;
    fallback = false;
    if (can_restart) {
      const double tol = opt.lambda_restarts ? config.restart_tol : 0.0;
      const Index cap_here = opt.cap_restarts ? cap : 0;
      if (pending_restart || restart_criterion(lambdas, tol, state->dim(), cap_here)) {
        do_restart();
      }
    }
    StepResult step = state->step(in.A, w, in.L);
    if (!step.appended) {
      if (!can_restart) {
        out.status = SolveStatus::breakdown;
        break;
      }
      if (since_restart == 0) {
        out.status = SolveStatus::stagnated;
        break;
      }
      do_restart();
      step = state->step(in.A, w, in.L);
      if (!step.appended) {
        out.status = SolveStatus::stagnated;
        break;
      }
    }
    ++since_restart;
    out.peak_basis_columns = std::max(out.peak_basis_columns, state->stored_columns());

    const Vector& base = opt.anchor == Anchor::previous ? x : anchor;
    const Vector& r_base = opt.anchor == Anchor::previous ? r : r_anchor;
    const ProjectedProblem pp = detail::form_projected(*state, r_base, base, w, in.L, opt.reg);
    detail::LambdaChoice choice;
    if (!opt.zero_lambda) {
      choice = detail::choose_lambda(config, pp, *state, base, in, b_norm);
    }
    const ProjectedSolution sol = TikhonovFamily(pp).solve(choice.lambda);
    const Vector x_new = base + state->Z() * sol.y;
    const Vector r_new = in.b - in.A.apply(x_new);

    IterationRecord rec;
    rec.iter = k;
    rec.outer = k;
    rec.subspace_dim = state->dim();
    rec.basis_columns = state->stored_columns();
    rec.restarted = restarted;
    rec.corrected_fallback = fallback;
    rec.dp_attained = choice.dp_attained;
    rec.projected_residual_norm = sol.residual_norm;
    detail::fill_record(rec, in, x_new, r_new, x, w, choice.lambda, config.p, out.tau_smooth);
    out.history.push_back(rec);

    const Vector x_old = std::exchange(x, x_new);
    r = r_new;
    lambdas.push_back(choice.lambda);
    if (opt.update_weights) w = irn_weights(in.L.apply(x), config.p, out.tau_smooth);

    if (detail::residual_vanished(r, b_norm)) {
      out.status = SolveStatus::zero_residual;
      break;
    }
    if (outer_stop.update(x, x_old)) {
      out.status = SolveStatus::converged;
      break;
    }
    if (step.status == StepStatus::breakdown) {
      if (!can_restart) {
        out.status = SolveStatus::breakdown;
        break;
      }
      pending_restart = true;
    }
  }
  out.x = x;
  return out;
}

void require_method(const SolverConfig& config, std::initializer_list<Method> allowed,
                    const char* who) {
  for (Method m : allowed) {
    if (config.method == m) return;
  }
  throw std::invalid_argument(std::string(who) + ": unsupported method " +
                              to_string(config.method));
}

}  // namespace

SolveResult solve_ir(const SolverConfig& config, const SolveInput& in) {
  require_method(config, {Method::ir_fgmres, Method::ir_flsqr}, "solve_ir");
  EngineOptions opt;
  opt.lambda_restarts = true;
  return run_engine(config, in, opt);
}

SolveResult solve_cir(const SolverConfig& config, const SolveInput& in) {
  require_method(config, {Method::cir_fgmres, Method::cir_flsqr}, "solve_cir");
  EngineOptions opt;
  opt.lambda_restarts = true;
  opt.corrected = true;
  return run_engine(config, in, opt);
}

SolveResult solve_irw(const SolverConfig& config, const SolveInput& in) {
  require_method(config, {Method::irw_fgmres, Method::irw_flsqr}, "solve_irw");
  EngineOptions opt;
  opt.anchor = Anchor::restart;
  opt.cap_restarts = false;
  return run_engine(config, in, opt);
}

SolveResult solve_hybrid_flexible(const SolverConfig& config, const SolveInput& in) {
  require_method(config, {Method::hybrid_fgmres, Method::hybrid_flsqr},
                 "solve_hybrid_flexible");
  EngineOptions opt;
  opt.reg = ProjectedReg::identity;
  opt.anchor = Anchor::restart;
  return run_engine(config, in, opt);
}

SolveResult solve_flexible(const SolverConfig& config, const SolveInput& in) {
  require_method(config, {Method::flexible_fgmres, Method::flexible_flsqr}, "solve_flexible");
  EngineOptions opt;
  opt.reg = ProjectedReg::identity;
  opt.anchor = Anchor::restart;
  opt.zero_lambda = true;
  return run_engine(config, in, opt);
}

SolveResult solve_hybrid_standard(const SolverConfig& config, const SolveInput& in) {
  require_method(config, {Method::hybrid_gmres, Method::hybrid_lsqr},
                 "solve_hybrid_standard");
  EngineOptions opt;
  opt.reg = ProjectedReg::identity;
  opt.anchor = Anchor::restart;
  opt.update_weights = false;
  return run_engine(config, in, opt);
}

SolveResult solve(const SolverConfig& config, const SolveInput& in) {
  switch (config.method) {
    case Method::ir_fgmres:
    case Method::ir_flsqr:
      return solve_ir(config, in);
    case Method::cir_fgmres:
    case Method::cir_flsqr:
      return solve_cir(config, in);
    case Method::irw_fgmres:
    case Method::irw_flsqr:
      return solve_irw(config, in);
    case Method::hybrid_fgmres:
    case Method::hybrid_flsqr:
      return solve_hybrid_flexible(config, in);
    case Method::flexible_fgmres:
    case Method::flexible_flsqr:
      return solve_flexible(config, in);
    case Method::hybrid_gmres:
    case Method::hybrid_lsqr:
      return solve_hybrid_standard(config, in);
    case Method::irn_gmres:
    case Method::irn_lsqr:
      return solve_irn_inner_outer(config, in);
    case Method::fista:
      return solve_fista(config, in);
  }
  throw std::invalid_argument("solve: unknown method");
}

MajorantSolution solve_majorant_subproblem(const LinearOperator& A, const Vector& b,
                                           const RegOperator& L, const WeightVector& w,
                                           double lambda, const Vector& x_prev,
                                           Index dim, KrylovKind kind) {
  require_size(b.size(), A.rows(), "solve_majorant_subproblem b");
  require_size(x_prev.size(), A.cols(), "solve_majorant_subproblem x_prev");
  const Vector r = b - A.apply(x_prev);
  MajorantSolution out;
  out.x = x_prev;
  if (r.norm() == 0.0) return out;
  auto state = plain_restart(r, kind, A.cols());
  for (Index j = 0; j < dim; ++j) {
    const StepResult step = state->step(A, w, L);
    if (step.status == StepStatus::breakdown) break;
  }
  if (state->dim() == 0) return out;
  const ProjectedProblem pp =
      detail::form_projected(*state, r, x_prev, w, L, detail::ProjectedReg::weighted_shift);
  const ProjectedSolution sol = TikhonovFamily(pp).solve(lambda);
  out.x = x_prev + state->Z() * sol.y;
  out.dim = state->dim();
  out.rank_deficient = sol.rank_deficient;
  return out;
}

}  // namespace irk
