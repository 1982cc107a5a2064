#include "irk/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "irk/random.hpp"

namespace irk {

LinearOperator::LinearOperator(Index rows, Index cols,
                               std::shared_ptr<const Impl> impl,
                               std::string name)
    : rows_(rows), cols_(cols), impl_(std::move(impl)), name_(std::move(name)) {
  if (rows_ < 1 || cols_ < 1) {
    throw std::invalid_argument("LinearOperator: dimensions must be positive");
  }
}

Vector LinearOperator::apply(ConstVectorRef x) const {
  Vector out(rows_);
  apply(x, out);
  return out;
}

Vector LinearOperator::apply_adjoint(ConstVectorRef y) const {
  Vector out(cols_);
  apply_adjoint(y, out);
  return out;
}

void LinearOperator::apply(ConstVectorRef x, VectorRef out) const {
  require_size(x.size(), cols_, "LinearOperator::apply input");
  require_size(out.size(), rows_, "LinearOperator::apply output");
  impl_->apply(x, out);
}

void LinearOperator::apply_adjoint(ConstVectorRef y, VectorRef out) const {
  require_size(y.size(), rows_, "LinearOperator::apply_adjoint input");
  require_size(out.size(), cols_, "LinearOperator::apply_adjoint output");
  impl_->apply_adjoint(y, out);
}

std::optional<Matrix> LinearOperator::materialize() const {
  if (cols_ > kMaxDenseColumns) return std::nullopt;
  Matrix dense(rows_, cols_);
  Vector e = Vector::Zero(cols_);
  for (Index j = 0; j < cols_; ++j) {
    e[j] = 1.0;
    impl_->apply(e, dense.col(j));
    e[j] = 0.0;
  }
  return dense;
}

namespace {

class IdentityImpl final : public LinearOperator::Impl {
 public:
  void apply(ConstVectorRef x, VectorRef out) const override { out = x; }
  void apply_adjoint(ConstVectorRef y, VectorRef out) const override {
    out = y;
  }
};

class DenseImpl final : public LinearOperator::Impl {
 public:
  explicit DenseImpl(Matrix a) : a_(std::move(a)) {}
  void apply(ConstVectorRef x, VectorRef out) const override {
    out.noalias() = a_ * x;
  }
  void apply_adjoint(ConstVectorRef y, VectorRef out) const override {
    out.noalias() = a_.transpose() * y;
  }

 private:
  Matrix a_;
};

class SparseImpl final : public LinearOperator::Impl {
 public:
  explicit SparseImpl(Eigen::SparseMatrix<double, Eigen::RowMajor> a)
      : a_(std::move(a)) {}
  void apply(ConstVectorRef x, VectorRef out) const override {
    out.noalias() = a_ * x;
  }
  void apply_adjoint(ConstVectorRef y, VectorRef out) const override {
    out.noalias() = a_.transpose() * y;
  }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_;
};

// Maps an out-of-range index back into [0, n) by half-sample reflection;
// returns -1 for the zero boundary.
Index boundary_index(Index i, Index n, Boundary boundary) {
  if (i >= 0 && i < n) return i;
  if (boundary == Boundary::zero) return -1;
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

class Blur2dImpl final : public LinearOperator::Impl {
 public:
  Blur2dImpl(Index nx, Index ny, std::vector<double> kernel, Boundary boundary)
      : nx_(nx), ny_(ny), kernel_(std::move(kernel)), boundary_(boundary) {}

  void apply(ConstVectorRef x, VectorRef out) const override {
    Vector tmp(nx_ * ny_);
    along_rows(x, tmp, false);
    along_cols(tmp, out, false);
  }

  void apply_adjoint(ConstVectorRef y, VectorRef out) const override {
    Vector tmp(nx_ * ny_);
    along_cols(y, tmp, true);
    along_rows(tmp, out, true);
  }

 private:
  Index radius() const { return static_cast<Index>(kernel_.size() / 2); }

  // One-dimensional pass over a strided line of length n. The forward pass
  // gathers out[i] = sum_k g[k] in[bc(i - k)]; the adjoint scatters the same
  // coefficients back, so the pair is an exact transpose under either
  // boundary rule.
  void line(const double* in, double* out, Index n, Index stride,
            bool adjoint) const {
    const Index r = radius();
    for (Index i = 0; i < n; ++i) out[i * stride] = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index k = -r; k <= r; ++k) {
        const Index j = boundary_index(i - k, n, boundary_);
        if (j < 0) continue;
        const double g = kernel_[static_cast<std::size_t>(k + r)];
        if (adjoint) {
          out[j * stride] += g * in[i * stride];
        } else {
          out[i * stride] += g * in[j * stride];
        }
      }
    }
  }

  // Blur along the row index (vertical direction) of every column.
  void along_cols(ConstVectorRef in, VectorRef out, bool adjoint) const {
    for (Index c = 0; c < nx_; ++c) {
      line(in.data() + c * ny_, out.data() + c * ny_, ny_, 1, adjoint);
    }
  }

  // Blur along the column index (horizontal direction) of every row.
  void along_rows(ConstVectorRef in, VectorRef out, bool adjoint) const {
    for (Index r = 0; r < ny_; ++r) {
      line(in.data() + r, out.data() + r, nx_, ny_, adjoint);
    }
  }

  Index nx_;
  Index ny_;
  std::vector<double> kernel_;
  Boundary boundary_;
};

}  // namespace

LinearOperator make_identity(Index n) {
  return LinearOperator(n, n, std::make_shared<IdentityImpl>(), "identity");
}

LinearOperator make_dense(Matrix a, std::string name) {
  const Index rows = a.rows();
  const Index cols = a.cols();
  return LinearOperator(rows, cols, std::make_shared<DenseImpl>(std::move(a)),
                        std::move(name));
}

LinearOperator make_sparse(Eigen::SparseMatrix<double, Eigen::RowMajor> a,
                           std::string name) {
  a.makeCompressed();
  const Index rows = a.rows();
  const Index cols = a.cols();
  return LinearOperator(rows, cols, std::make_shared<SparseImpl>(std::move(a)),
                        std::move(name));
}

LinearOperator make_gaussian_blur_1d(Index n) {
  if (n < 1) throw std::invalid_argument("make_gaussian_blur_1d: n must be >= 1");
  const double scale = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  Matrix a(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double d = static_cast<double>(i - j);
      a(i, j) = scale * std::exp(-d * d / 8.0);
    }
  }
  return make_dense(std::move(a), "gaussian_blur_1d");
}

LinearOperator make_gaussian_blur_2d(Index nx, Index ny, double psf_sigma,
                                     Boundary boundary) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("make_gaussian_blur_2d: nx, ny must be >= 1");
  }
  if (!(psf_sigma > 0.0)) {
    throw std::invalid_argument("make_gaussian_blur_2d: psf_sigma must be > 0");
  }
  const Index r = std::max<Index>(1, static_cast<Index>(std::ceil(3.0 * psf_sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (Index k = -r; k <= r; ++k) {
    const double d = static_cast<double>(k);
    const double g = std::exp(-d * d / (2.0 * psf_sigma * psf_sigma));
    kernel[static_cast<std::size_t>(k + r)] = g;
    sum += g;
  }
  for (double& g : kernel) g /= sum;
  return LinearOperator(
      nx * ny, nx * ny,
      std::make_shared<Blur2dImpl>(nx, ny, std::move(kernel), boundary),
      "gaussian_blur_2d");
}

namespace {

// Appends (pixel, length) pairs for the chord of the line p0 + s d through
// the square [-h, h]^2 partitioned into unit pixels.
void trace_ray(double p0x, double p0y, double dx, double dy, Index nx,
               Index row, std::vector<Eigen::Triplet<double>>& triplets) {
  const double h = 0.5 * static_cast<double>(nx);
  constexpr double kParallel = 1e-14;
  double smin = -std::numeric_limits<double>::infinity();
  double smax = std::numeric_limits<double>::infinity();
  const double p[2] = {p0x, p0y};
  const double d[2] = {dx, dy};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(d[a]) < kParallel) {
      if (p[a] < -h || p[a] > h) return;
      continue;
    }
    double s1 = (-h - p[a]) / d[a];
    double s2 = (h - p[a]) / d[a];
    if (s1 > s2) std::swap(s1, s2);
    smin = std::max(smin, s1);
    smax = std::min(smax, s2);
  }
  if (!(smax > smin)) return;

  std::vector<double> cuts{smin, smax};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(d[a]) < kParallel) continue;
    for (Index g = 0; g <= nx; ++g) {
      const double s = (-h + static_cast<double>(g) - p[a]) / d[a];
      if (s > smin && s < smax) cuts.push_back(s);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  constexpr double kMinLength = 1e-12;
  for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
    const double len = cuts[q + 1] - cuts[q];
    if (len <= kMinLength) continue;
    const double mid = 0.5 * (cuts[q] + cuts[q + 1]);
    const double mx = p0x + mid * dx;
    const double my = p0y + mid * dy;
    const Index col = std::clamp<Index>(static_cast<Index>(std::floor(mx + h)), 0, nx - 1);
    const Index pix_row = std::clamp<Index>(static_cast<Index>(std::floor(h - my)), 0, nx - 1);
    triplets.emplace_back(row, pix_row + nx * col, len);
  }
}

}  // namespace

LinearOperator make_tomography(Index nx, Index n_angles, Index n_detectors,
                               std::optional<double> detector_width) {
  if (nx < 2) throw std::invalid_argument("make_tomography: nx must be >= 2");
  if (n_angles < 1 || n_detectors < 1) {
    throw std::invalid_argument(
        "make_tomography: n_angles and n_detectors must be >= 1");
  }
  const double width =
      detector_width.value_or(std::sqrt(2.0) * static_cast<double>(nx));
  if (!(width > 0.0)) {
    throw std::invalid_argument("make_tomography: detector width must be > 0");
  }
  const double spacing = width / static_cast<double>(n_detectors);
  const Index rows = n_angles * n_detectors;

  std::vector<Eigen::Triplet<double>> triplets;
  for (Index a = 0; a < n_angles; ++a) {
    const double degrees =
        n_angles == 1 ? 0.0
                      : 179.0 * static_cast<double>(a) /
                            static_cast<double>(n_angles - 1);
    const double theta = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (Index k = 0; k < n_detectors; ++k) {
      const double t =
          (static_cast<double>(k) + 0.5) * spacing - 0.5 * width;
      trace_ray(-t * s, t * c, c, s, nx, a * n_detectors + k, triplets);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(rows, nx * nx);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return make_sparse(std::move(a), "tomography");
}

double estimate_norm(const LinearOperator& op, int iterations,
                     std::uint64_t seed) {
  Rng rng(seed, 0x6e6f726dULL);
  Vector v = rng.normal_vector(op.cols());
  v.normalize();
  double sigma = 0.0;
  Vector av(op.rows());
  Vector w(op.cols());
  for (int it = 0; it < iterations; ++it) {
    op.apply(v, av);
    op.apply_adjoint(av, w);
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    sigma = std::sqrt(nrm);
    v = w / nrm;
  }
  return sigma;
}

}  // namespace irk
