#ifndef IRK_KRYLOV_HPP
#define IRK_KRYLOV_HPP

#include <algorithm>
#include <memory>

#include "irk/operators.hpp"
#include "irk/regularization.hpp"
#include "irk/types.hpp"

namespace irk {

/// Leading columns of a ColumnStore.
using ColumnsView = Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true>;

enum class KrylovKind { arnoldi, golub_kahan };

enum class StepStatus { ok, breakdown };

/// Which projector seeds the residual direction after a corrected restart:
/// `image` removes the component along A z1 / ||A z1||, `solution` removes
/// the component along z1 = x / ||x|| (square operators only) before the
/// result is orthogonalized against the image vector.
enum class CorrectionProjector { image, solution };

/// A step reports breakdown when the orthogonalized vector has norm at most
/// kBreakdownRelTol times its norm before orthogonalization (floor
/// kBreakdownFloor).
inline constexpr double kBreakdownRelTol = 1e-12;
inline constexpr double kBreakdownFloor = 1e-300;

/// Column-major matrix whose column count grows by capacity doubling,
/// optionally bounded by a hard column limit.
class ColumnStore {
 public:
  explicit ColumnStore(Index rows = 0, Index limit = 0);

  void push_back(ConstVectorRef column);
  Index rows() const { return data_.rows(); }
  Index size() const { return size_; }
  Index capacity() const { return data_.cols(); }
  Index limit() const { return limit_; }

  ColumnsView view() const { return data_.leftCols(size_); }
  auto col(Index j) const { return data_.col(j); }

 private:
  Matrix data_;
  Index size_ = 0;
  Index limit_ = 0;
};

struct StepResult {
  StepStatus status = StepStatus::ok;
  /// Whether a new search direction z was appended to Z.
  bool appended = false;
  /// New column of the projected matrix (H or M), including the trailing
  /// normalization coefficient (zero-length if nothing was appended).
  Vector column;
};

/// Common state of a flexible Krylov decomposition A Z = X T, where X is
/// the orthonormal image-space basis (V for Arnoldi, U for Golub-Kahan) and
/// T the upper Hessenberg projected matrix (H or M).
///
/// After a breakdown that still produced a direction, the state is
/// exhausted: T becomes square (X gains no column) and further steps are
/// refused until a restart.
class FlexibleDecomposition {
 public:
  virtual ~FlexibleDecomposition() = default;

  virtual KrylovKind kind() const = 0;
  virtual StepResult step(const LinearOperator& a, const WeightVector& w,
                          const RegOperator& reg) = 0;
  virtual ColumnsView image_basis() const = 0;

  Index dim() const { return z_.size(); }
  ColumnsView Z() const { return z_.view(); }
  const Matrix& projected_matrix() const { return t_; }
  /// Largest number of basis columns held by any stored matrix.
  virtual Index stored_columns() const = 0;

  bool corrected() const { return corrected_; }
  bool exhausted() const { return exhausted_; }

 protected:
  FlexibleDecomposition(Index n, Index limit) : z_(n, limit) {}

  ColumnStore z_;
  Matrix t_;
  bool corrected_ = false;
  bool exhausted_ = false;
};

/// Flexible Arnoldi: A Z_i = V_{i+1} H_{i+1} with z_j = (W_j L)^{-1} v_j.
class FlexibleArnoldi final : public FlexibleDecomposition {
 public:
  /// V = [r0 / ||r0||]. Throws ConvergedError when r0 = 0.
  static FlexibleArnoldi start(ConstVectorRef r0, Index limit = 0);

  KrylovKind kind() const override { return KrylovKind::arnoldi; }
  StepResult step(const LinearOperator& a, const WeightVector& w,
                  const RegOperator& reg) override;
  ColumnsView image_basis() const override { return v_.view(); }
  Index stored_columns() const override { return v_.size(); }

  ColumnsView V() const { return v_.view(); }
  const Matrix& H() const { return t_; }

 private:
  friend struct CorrectedRestartBuilder;
  FlexibleArnoldi(Index n, Index limit) : FlexibleDecomposition(n, limit), v_(n, limit) {}

  ColumnStore v_;
};

/// Flexible Golub-Kahan: A Z_i = U_{i+1} M_{i+1} and A^T U = V S, where the
/// second relation pairs U's columns from index u_offset() on with V.
class FlexibleGolubKahan final : public FlexibleDecomposition {
 public:
  static FlexibleGolubKahan start(ConstVectorRef r0, Index n, Index limit = 0);

  KrylovKind kind() const override { return KrylovKind::golub_kahan; }
  StepResult step(const LinearOperator& a, const WeightVector& w,
                  const RegOperator& reg) override;
  ColumnsView image_basis() const override { return u_.view(); }
  Index stored_columns() const override {
    return std::max(u_.size(), v_.size());
  }

  ColumnsView U() const { return u_.view(); }
  ColumnsView V() const { return v_.view(); }
  const Matrix& M() const { return t_; }
  const Matrix& S() const { return s_; }
  /// Leading U columns without a paired V column (1 after a corrected restart).
  Index u_offset() const { return u_offset_; }
  /// Value of the last coefficient s_kk produced by a step, for inspection.
  double last_s_diagonal() const { return last_s_; }

 private:
  friend struct CorrectedRestartBuilder;
  FlexibleGolubKahan(Index m, Index n, Index limit)
      : FlexibleDecomposition(n, limit), u_(m, limit), v_(n, limit) {}

  ColumnStore u_;
  ColumnStore v_;
  Matrix s_;
  Index u_offset_ = 0;
  double last_s_ = 0.0;
};

/// Discards everything and reseeds from the current residual.
std::unique_ptr<FlexibleDecomposition> plain_restart(ConstVectorRef r,
                                                     KrylovKind kind, Index n,
                                                     Index limit = 0);

enum class CorrectionFailure { none, zero_solution, null_space, parallel_residual };

const char* to_string(CorrectionFailure failure);

struct CorrectedRestart {
  std::unique_ptr<FlexibleDecomposition> state;  // null on failure
  CorrectionFailure failure = CorrectionFailure::none;
};

/// Solution-augmented restart: Z = [x / ||x||], first image vector
/// A z1 / ||A z1||, second image vector the normalized part of r orthogonal
/// to it. The projected matrix starts as [||A z1||; 0].
CorrectedRestart corrected_restart(
    ConstVectorRef x_prev, ConstVectorRef r, const LinearOperator& a,
    KrylovKind kind, Index limit = 0,
    CorrectionProjector projector = CorrectionProjector::image);

}  // namespace irk

#endif  // IRK_KRYLOV_HPP
