#include <algorithm>
#include <utility>

#include "irk/solvers.hpp"
#include "solver_detail.hpp"

namespace irk {

// Outer loop: freeze W_k = W(L x_{k-1}). Inner loop: fresh Krylov space
// from r_{k-1} preconditioned by the frozen (W_k L)^{-1}, projected problem
// anchored at x_{k-1}, lambda chosen per inner step. The inner loop ends on
// lambda stabilization, the inner cap, or breakdown.
SolveResult solve_irn_inner_outer(const SolverConfig& config, const SolveInput& in) {
  if (config.method != Method::irn_gmres && config.method != Method::irn_lsqr) {
    throw std::invalid_argument(std::string("solve_irn_inner_outer: unsupported method ") +
                                to_string(config.method));
  }
  detail::validate_common(config, in);
  const KrylovKind kind = krylov_kind(config.method);
  const Index n = in.A.cols();
  const double b_norm = in.b.norm();
  if (b_norm == 0.0) throw std::invalid_argument("solver: b must be nonzero");
  const Index inner_cap =
      config.max_basis_vectors > 0 ? config.max_basis_vectors : config.inner_max;

  SolveResult out;
  Vector x = detail::initial_guess(config, n);
  Vector r = in.b - in.A.apply(x);
  out.tau_smooth = detail::resolve_tau(config, r);
  out.x = x;
  if (detail::residual_vanished(r, b_norm)) {
    out.status = SolveStatus::zero_residual;
    return out;
  }

  WeightVector w = unit_weights(n);
  detail::OuterStop outer_stop(config.outer_tol);
  Index k = 0;
  Index outer = 0;
  bool done = false;
  while (!done && k < config.kmax) {
    ++outer;
    if (outer > 1) ++out.restarts;
    const Vector anchor = x;
    const Vector r_anchor = r;
    auto state = plain_restart(r_anchor, kind, n);
    std::vector<double> lambdas;
    Vector x_inner = anchor;
    Vector r_inner = r_anchor;
    bool any_step = false;
    while (k < config.kmax) {
      if (any_step && restart_criterion(lambdas, config.restart_tol, state->dim(), inner_cap)) {
        break;
      }
      const StepResult step = state->step(in.A, w, in.L);
      if (!step.appended) break;
      ++k;
      out.peak_basis_columns = std::max(out.peak_basis_columns, state->stored_columns());
      const ProjectedProblem pp = detail::form_projected(
          *state, r_anchor, anchor, w, in.L, detail::ProjectedReg::weighted_shift);
      const detail::LambdaChoice choice =
          detail::choose_lambda(config, pp, *state, anchor, in, b_norm);
      const ProjectedSolution sol = TikhonovFamily(pp).solve(choice.lambda);
      Vector x_new = anchor + state->Z() * sol.y;
      Vector r_new = in.b - in.A.apply(x_new);

      IterationRecord rec;
      rec.iter = k;
      rec.outer = outer;
      rec.subspace_dim = state->dim();
      rec.basis_columns = state->stored_columns();
      rec.restarted = outer > 1 && !any_step;
      rec.dp_attained = choice.dp_attained;
      rec.projected_residual_norm = sol.residual_norm;
      detail::fill_record(rec, in, x_new, r_new, x_inner, w, choice.lambda, config.p,
                          out.tau_smooth);
      out.history.push_back(rec);

      x_inner = std::move(x_new);
      r_inner = std::move(r_new);
      lambdas.push_back(choice.lambda);
      any_step = true;
      if (step.status == StepStatus::breakdown || detail::residual_vanished(r_inner, b_norm)) break;
    }
    if (!any_step) {
      out.status = SolveStatus::stagnated;
      break;
    }
    const Vector x_old = std::exchange(x, x_inner);
    r = r_inner;
    if (detail::residual_vanished(r, b_norm)) {
      out.status = SolveStatus::zero_residual;
      break;
    }
    w = irn_weights(in.L.apply(x), config.p, out.tau_smooth);
    if (outer_stop.update(x, x_old)) {
      out.status = SolveStatus::converged;
      done = true;
    }
  }
  out.x = x;
  return out;
}

}  // namespace irk
