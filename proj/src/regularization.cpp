#include "irk/regularization.hpp"

#include <cmath>
#include <string>

namespace irk {

RegOperator::RegOperator(RegKind kind, Index n) : kind_(kind), n_(n) {
  if (n < 1) throw std::invalid_argument("RegOperator: size must be >= 1");
}

Vector RegOperator::apply(ConstVectorRef x) const {
  require_size(x.size(), n_, "RegOperator::apply");
  if (kind_ == RegKind::identity) return x;
  Vector out(n_);
  out[0] = x[0];
  for (Index i = 1; i < n_; ++i) out[i] = x[i] - x[i - 1];
  return out;
}

Vector RegOperator::solve(ConstVectorRef v) const {
  require_size(v.size(), n_, "RegOperator::solve");
  if (kind_ == RegKind::identity) return v;
  Vector out(n_);
  out[0] = v[0];
  for (Index i = 1; i < n_; ++i) out[i] = v[i] + out[i - 1];
  return out;
}

Matrix RegOperator::dense() const {
  Matrix l = Matrix::Identity(n_, n_);
  if (kind_ == RegKind::first_difference) {
    for (Index i = 1; i < n_; ++i) l(i, i - 1) = -1.0;
  }
  return l;
}

WeightVector irn_weights(ConstVectorRef v, double p, double tau_smooth) {
  if (!(p > 0.0) || p > 2.0) {
    throw std::invalid_argument("irn_weights: p must lie in (0, 2], got " +
                                std::to_string(p));
  }
  if (!(tau_smooth >= 0.0)) {
    throw std::invalid_argument("irn_weights: tau_smooth must be >= 0");
  }
  const double exponent = (p - 2.0) / 4.0;
  const double tau2 = tau_smooth * tau_smooth;
  WeightVector out{Vector(v.size()), p, tau_smooth};
  for (Index i = 0; i < v.size(); ++i) {
    const double base = v[i] * v[i] + tau2;
    if (base == 0.0 && exponent < 0.0) {
      throw std::domain_error(
          "irn_weights: zero entry with tau_smooth = 0 (division by zero)");
    }
    out.w[i] = exponent == 0.0 ? 1.0 : std::pow(base, exponent);
  }
  return out;
}

WeightVector unit_weights(Index n) { return {Vector::Ones(n), 2.0, 0.0}; }

Vector apply_priorconditioner(const WeightVector& w, const RegOperator& reg,
                              ConstVectorRef v) {
  require_size(v.size(), reg.size(), "apply_priorconditioner");
  require_size(w.size(), reg.size(), "apply_priorconditioner weights");
  if ((w.w.array() == 0.0).any()) {
    throw std::domain_error("apply_priorconditioner: zero weight entry");
  }
  return reg.solve(v.cwiseQuotient(w.w));
}

Vector apply_weighted_reg(const WeightVector& w, const RegOperator& reg,
                          ConstVectorRef x) {
  require_size(w.size(), reg.size(), "apply_weighted_reg weights");
  return w.w.cwiseProduct(reg.apply(x));
}

}  // namespace irk
