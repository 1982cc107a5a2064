#include "irk/krylov.hpp"

#include <cmath>
#include <string>

namespace irk {

ColumnStore::ColumnStore(Index rows, Index limit) : data_(rows, 0), limit_(limit) {}

void ColumnStore::push_back(ConstVectorRef column) {
  require_size(column.size(), data_.rows(), "ColumnStore::push_back");
  if (limit_ > 0 && size_ >= limit_) {
    throw std::logic_error("ColumnStore: column limit of " +
                           std::to_string(limit_) + " exceeded");
  }
  if (size_ == data_.cols()) {
    Index grown = std::max<Index>(1, 2 * data_.cols());
    if (limit_ > 0) grown = std::min(grown, limit_);
    data_.conservativeResize(Eigen::NoChange, grown);
  }
  data_.col(size_++) = column;
}

namespace {

constexpr double kReorthogonalizeRatio = 0.70710678118654752;  // 1/sqrt(2)

struct Orthogonalized {
  Vector coefficients;
  double norm_before = 0.0;
  double norm_after = 0.0;

  bool broke_down() const {
    return norm_after <= std::max(kBreakdownRelTol * norm_before, kBreakdownFloor);
  }
};

// Modified Gram-Schmidt of q against the columns of `basis`. A second pass
// runs whenever a pass shrinks q below 1/sqrt(2) of its incoming norm, at
// most twice.
template <typename Basis>
Orthogonalized orthogonalize(const Basis& basis, VectorRef q) {
  Orthogonalized out;
  out.coefficients = Vector::Zero(basis.cols());
  out.norm_before = q.norm();
  double incoming = out.norm_before;
  for (int pass = 0; pass < 3; ++pass) {
    for (Index j = 0; j < basis.cols(); ++j) {
      const double c = basis.col(j).dot(q);
      q.noalias() -= c * basis.col(j);
      out.coefficients[j] += c;
    }
    out.norm_after = q.norm();
    if (basis.cols() == 0 || out.norm_after > kReorthogonalizeRatio * incoming) break;
    incoming = out.norm_after;
  }
  return out;
}

void append_column(Matrix& t, const Vector& column) {
  const Index rows = std::max(t.rows(), column.size());
  const Index cols = t.cols() + 1;
  Matrix grown = Matrix::Zero(rows, cols);
  grown.topLeftCorner(t.rows(), t.cols()) = t;
  grown.col(cols - 1).head(column.size()) = column;
  t = std::move(grown);
}

}  // namespace

FlexibleArnoldi FlexibleArnoldi::start(ConstVectorRef r0, Index limit) {
  const double beta = r0.norm();
  if (beta == 0.0) throw ConvergedError("flexible Arnoldi: zero residual (converged)");
  FlexibleArnoldi state(r0.size(), limit);
  state.v_.push_back(r0 / beta);
  state.t_ = Matrix::Zero(1, 0);
  return state;
}

StepResult FlexibleArnoldi::step(const LinearOperator& a, const WeightVector& w,
                                 const RegOperator& reg) {
  if (!a.square()) throw DimensionError("flexible Arnoldi needs a square operator");
  StepResult result;
  if (exhausted_) {
    result.status = StepStatus::breakdown;
    return result;
  }
  const Vector z = apply_priorconditioner(w, reg, v_.col(v_.size() - 1));
  Vector q = a.apply(z);
  const Orthogonalized orth = orthogonalize(v_.view(), q);

  result.appended = true;
  result.column.resize(orth.coefficients.size() + 1);
  result.column << orth.coefficients, orth.norm_after;
  z_.push_back(z);
  if (orth.broke_down()) {
    result.column[result.column.size() - 1] = 0.0;
    append_column(t_, orth.coefficients);
    exhausted_ = true;
    result.status = StepStatus::breakdown;
    return result;
  }
  append_column(t_, result.column);
  v_.push_back(q / orth.norm_after);
  return result;
}

FlexibleGolubKahan FlexibleGolubKahan::start(ConstVectorRef r0, Index n, Index limit) {
  const double beta = r0.norm();
  if (beta == 0.0) throw ConvergedError("flexible Golub-Kahan: zero residual (converged)");
  FlexibleGolubKahan state(r0.size(), n, limit);
  state.u_.push_back(r0 / beta);
  state.t_ = Matrix::Zero(1, 0);
  state.s_ = Matrix::Zero(0, 0);
  return state;
}

StepResult FlexibleGolubKahan::step(const LinearOperator& a, const WeightVector& w,
                                    const RegOperator& reg) {
  StepResult result;
  if (exhausted_) {
    result.status = StepStatus::breakdown;
    return result;
  }
  Vector wv = a.apply_adjoint(u_.col(u_.size() - 1));
  const Orthogonalized orth_s = orthogonalize(v_.view(), wv);
  last_s_ = orth_s.norm_after;
  if (orth_s.broke_down()) {
    exhausted_ = true;
    result.status = StepStatus::breakdown;
    return result;
  }
  Vector s_col(orth_s.coefficients.size() + 1);
  s_col << orth_s.coefficients, orth_s.norm_after;
  {
    const Index k = s_.cols() + 1;
    Matrix grown = Matrix::Zero(k, k);
    grown.topLeftCorner(k - 1, k - 1) = s_;
    grown.col(k - 1) = s_col;
    s_ = std::move(grown);
  }
  v_.push_back(wv / orth_s.norm_after);

  const Vector z = apply_priorconditioner(w, reg, v_.col(v_.size() - 1));
  Vector q = a.apply(z);
  const Orthogonalized orth_m = orthogonalize(u_.view(), q);

  result.appended = true;
  result.column.resize(orth_m.coefficients.size() + 1);
  result.column << orth_m.coefficients, orth_m.norm_after;
  z_.push_back(z);
  if (orth_m.broke_down()) {
    result.column[result.column.size() - 1] = 0.0;
    append_column(t_, orth_m.coefficients);
    exhausted_ = true;
    result.status = StepStatus::breakdown;
    return result;
  }
  append_column(t_, result.column);
  u_.push_back(q / orth_m.norm_after);
  return result;
}

std::unique_ptr<FlexibleDecomposition> plain_restart(ConstVectorRef r, KrylovKind kind,
                                                     Index n, Index limit) {
  if (kind == KrylovKind::arnoldi) {
    return std::make_unique<FlexibleArnoldi>(FlexibleArnoldi::start(r, limit));
  }
  return std::make_unique<FlexibleGolubKahan>(FlexibleGolubKahan::start(r, n, limit));
}

const char* to_string(CorrectionFailure failure) {
  switch (failure) {
    case CorrectionFailure::none: return "none";
    case CorrectionFailure::zero_solution: return "zero_solution";
    case CorrectionFailure::null_space: return "null_space";
    case CorrectionFailure::parallel_residual: return "parallel_residual";
  }
  return "unknown";
}

struct CorrectedRestartBuilder {
  static CorrectedRestart build(ConstVectorRef x_prev, ConstVectorRef r,
                                const LinearOperator& a, KrylovKind kind, Index limit,
                                CorrectionProjector projector) {
    CorrectedRestart out;
    const double x_norm = x_prev.norm();
    const double r_norm = r.norm();
    if (r_norm == 0.0) throw ConvergedError("corrected restart: zero residual (converged)");
    if (x_norm == 0.0) {
      out.failure = CorrectionFailure::zero_solution;
      return out;
    }
    const Vector z1 = x_prev / x_norm;
    const Vector q = a.apply(z1);
    const double h11 = q.norm();
    if (h11 <= std::max(kBreakdownRelTol * r_norm, kBreakdownFloor)) {
      out.failure = CorrectionFailure::null_space;
      return out;
    }
    const Vector first = q / h11;

    Vector second = r;
    if (projector == CorrectionProjector::solution) {
      if (!a.square()) {
        throw DimensionError("solution projector needs a square operator");
      }
      second -= z1.dot(second) * z1;
    }
    Matrix basis(first.size(), 1);
    basis.col(0) = first;
    const Orthogonalized orth = orthogonalize(basis, second);
    if (orth.norm_after <= std::max(kBreakdownRelTol * r_norm, kBreakdownFloor)) {
      out.failure = CorrectionFailure::parallel_residual;
      return out;
    }
    second /= orth.norm_after;

    Matrix t = Matrix::Zero(2, 1);
    t(0, 0) = h11;
    if (kind == KrylovKind::arnoldi) {
      if (!a.square()) throw DimensionError("flexible Arnoldi needs a square operator");
      auto state = std::unique_ptr<FlexibleArnoldi>(new FlexibleArnoldi(a.cols(), limit));
      state->z_.push_back(z1);
      state->v_.push_back(first);
      state->v_.push_back(second);
      state->t_ = t;
      state->corrected_ = true;
      out.state = std::move(state);
    } else {
      auto state = std::unique_ptr<FlexibleGolubKahan>(
          new FlexibleGolubKahan(a.rows(), a.cols(), limit));
      state->z_.push_back(z1);
      state->u_.push_back(first);
      state->u_.push_back(second);
      state->t_ = t;
      state->s_ = Matrix::Zero(0, 0);
      state->u_offset_ = 1;
      state->corrected_ = true;
      out.state = std::move(state);
    }
    return out;
  }
};

CorrectedRestart corrected_restart(ConstVectorRef x_prev, ConstVectorRef r,
                                   const LinearOperator& a, KrylovKind kind, Index limit,
                                   CorrectionProjector projector) {
  require_size(x_prev.size(), a.cols(), "corrected_restart solution");
  require_size(r.size(), a.rows(), "corrected_restart residual");
  return CorrectedRestartBuilder::build(x_prev, r, a, kind, limit, projector);
}

}  // namespace irk
