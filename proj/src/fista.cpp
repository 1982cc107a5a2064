#include <cmath>
#include <utility>

#include "irk/solvers.hpp"
#include "solver_detail.hpp"

namespace irk {

namespace {

Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double a) {
    const double m = std::abs(a) - t;
    return m > 0.0 ? std::copysign(m, a) : 0.0;
  });
}

double l1_objective(const Vector& residual, const Vector& x, double lambda) {
  return residual.squaredNorm() + lambda * x.lpNorm<1>();
}

}  // namespace

SolveResult solve_fista(const SolverConfig& config, const SolveInput& in) {
  if (config.method != Method::fista) {
    throw std::invalid_argument("solve_fista: method must be fista");
  }
  if (config.lambda_rule.kind != LambdaRuleKind::fixed) {
    throw std::invalid_argument("solve_fista: needs a fixed lambda");
  }
  if (in.L.kind() != RegKind::identity) {
    throw std::invalid_argument("solve_fista: only the identity regularization is supported");
  }
  detail::validate_common(config, in);
  const double lambda = config.lambda_rule.value;
  const Index n = in.A.cols();

  const double a_norm = estimate_norm(in.A, 50, config.seed);
  const double lipschitz = 2.0 * 1.05 * a_norm * a_norm;
  if (!(lipschitz > 0.0)) throw std::invalid_argument("solve_fista: zero operator");
  const double step = 1.0 / lipschitz;
  const double shrink = lambda * step;

  SolveResult out;
  Vector x = detail::initial_guess(config, n);
  Vector r = in.b - in.A.apply(x);
  out.tau_smooth = detail::resolve_tau(config, r);
  out.x = x;
  double f_x = l1_objective(r, x, lambda);
  Vector y = x;
  double t = 1.0;
  const WeightVector unit = unit_weights(n);
  detail::OuterStop outer_stop(config.outer_tol);

  for (Index k = 1; k <= config.kmax; ++k) {
    const Vector grad = -2.0 * in.A.apply_adjoint(in.b - in.A.apply(y));
    const Vector z = soft_threshold(y - step * grad, shrink);
    const Vector r_z = in.b - in.A.apply(z);
    const double f_z = l1_objective(r_z, z, lambda);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

    Vector x_new;
    Vector r_new;
    if (config.fista_monotone) {
      if (f_z <= f_x) {
        x_new = z;
        r_new = r_z;
        f_x = f_z;
      } else {
        x_new = x;
        r_new = r;
      }
      y = x_new + (t / t_next) * (z - x_new) + ((t - 1.0) / t_next) * (x_new - x);
    } else {
      x_new = z;
      r_new = r_z;
      f_x = f_z;
      y = z + ((t - 1.0) / t_next) * (z - x);
    }
    t = t_next;

    IterationRecord rec;
    rec.iter = k;
    rec.outer = k;
    rec.projected_residual_norm = r_new.norm();
    detail::fill_record(rec, in, x_new, r_new, x, unit, lambda, 1.0, out.tau_smooth);
    out.history.push_back(rec);

    const Vector x_old = std::exchange(x, x_new);
    r = r_new;
    if (outer_stop.update(x, x_old)) {
      out.status = SolveStatus::converged;
      break;
    }
  }
  out.x = x;
  return out;
}

}  // namespace irk
