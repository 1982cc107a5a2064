#ifndef IRK_REGULARIZATION_HPP
#define IRK_REGULARIZATION_HPP

#include "irk/types.hpp"

namespace irk {

enum class RegKind { identity, first_difference };

/// Invertible regularization matrix L.
///
/// `first_difference` is the lower bidiagonal matrix with unit diagonal and
/// -1 subdiagonal, i.e. (Lx)_0 = x_0 and (Lx)_i = x_i - x_{i-1}.
class RegOperator {
 public:
  RegOperator(RegKind kind, Index n);

  static RegOperator identity(Index n) { return {RegKind::identity, n}; }
  static RegOperator first_difference(Index n) {
    return {RegKind::first_difference, n};
  }

  RegKind kind() const { return kind_; }
  Index size() const { return n_; }

  Vector apply(ConstVectorRef x) const;
  /// L^{-1} v by forward substitution.
  Vector solve(ConstVectorRef v) const;
  Matrix dense() const;

 private:
  RegKind kind_;
  Index n_;
};

/// Diagonal of the smoothed reweighting matrix.
struct WeightVector {
  Vector w;
  double p = 2.0;
  double tau_smooth = 0.0;

  Index size() const { return w.size(); }
};

/// w_i = (v_i^2 + tau^2)^((p - 2) / 4).
///
/// Throws std::invalid_argument for p outside (0, 2] or negative tau, and
/// std::domain_error when tau = 0 meets a zero entry of v.
WeightVector irn_weights(ConstVectorRef v, double p, double tau_smooth);

/// All-ones weights (W = I).
WeightVector unit_weights(Index n);

/// (W L)^{-1} v = L^{-1} (W^{-1} v).
Vector apply_priorconditioner(const WeightVector& w, const RegOperator& reg,
                              ConstVectorRef v);

/// W L x.
Vector apply_weighted_reg(const WeightVector& w, const RegOperator& reg,
                          ConstVectorRef x);

}  // namespace irk

#endif  // IRK_REGULARIZATION_HPP
