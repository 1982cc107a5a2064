#ifndef IRK_OPERATORS_HPP
#define IRK_OPERATORS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/SparseCore>

#include "irk/types.hpp"

namespace irk {

/// \brief Matrix-free forward operator A : R^cols -> R^rows.
///
/// A LinearOperator is a cheap value handle over an immutable implementation,
/// so copies share the underlying data and may be used from several threads.
class LinearOperator {
 public:
  /// Backend interface. Implementations write the result into `out`, which is
  /// already sized and must be fully overwritten.
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual void apply(ConstVectorRef x, VectorRef out) const = 0;
    virtual void apply_adjoint(ConstVectorRef y, VectorRef out) const = 0;
  };

  /// Largest column count for which materialize() builds a dense copy.
  static constexpr Index kMaxDenseColumns = 512;

  LinearOperator(Index rows, Index cols, std::shared_ptr<const Impl> impl,
                 std::string name);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  const std::string& name() const { return name_; }

  Vector apply(ConstVectorRef x) const;
  Vector apply_adjoint(ConstVectorRef y) const;
  void apply(ConstVectorRef x, VectorRef out) const;
  void apply_adjoint(ConstVectorRef y, VectorRef out) const;

  /// Dense copy built column by column from apply(); only for cols() <= 512.
  std::optional<Matrix> materialize() const;

 private:
  Index rows_;
  Index cols_;
  std::shared_ptr<const Impl> impl_;
  std::string name_;
};

enum class Boundary { zero, reflexive };

LinearOperator make_identity(Index n);
LinearOperator make_dense(Matrix a, std::string name = "dense");
LinearOperator make_sparse(Eigen::SparseMatrix<double, Eigen::RowMajor> a,
                           std::string name = "sparse");

/// Symmetric Toeplitz blur with [A]_{ij} = exp(-(i-j)^2/8) / (2 sqrt(2 pi)).
/// Every entry is kept (no truncation of the kernel tails).
LinearOperator make_gaussian_blur_1d(Index n);

/// Spatially invariant Gaussian blur of an image with `ny` rows and `nx`
/// columns, flattened column-major (pixel (row, col) -> row + ny * col).
/// The separable kernel has half-width max(1, ceil(3 sigma)) and unit sum.
LinearOperator make_gaussian_blur_2d(Index nx, Index ny, double psf_sigma,
                                     Boundary boundary);

/// Parallel-beam ray-driven projector on an nx-by-nx pixel grid with unit
/// pixels centred at the origin. Angles are equispaced on [0, 179] degrees;
/// detector centres are spread evenly across `detector_width` pixel units
/// (default: the image diagonal). Entries are exact pixel-chord lengths.
LinearOperator make_tomography(Index nx, Index n_angles, Index n_detectors,
                               std::optional<double> detector_width = {});

/// Largest singular value estimate of `op` by power iteration on A^T A.
double estimate_norm(const LinearOperator& op, int iterations = 50,
                     std::uint64_t seed = 0);

}  // namespace irk

#endif  // IRK_OPERATORS_HPP
