#include <doctest.h>

#include <cmath>
#include <numbers>

#include "irk/operators.hpp"
#include "oracles.hpp"

using namespace irk;

namespace {

double adjoint_gap(const LinearOperator& op, std::uint64_t seed) {
  const Vector v = oracle::random_vector(op.cols(), seed);
  const Vector u = oracle::random_vector(op.rows(), seed + 7919);
  const Vector av = op.apply(v);
  const Vector atu = op.apply_adjoint(u);
  return std::abs(av.dot(u) - v.dot(atu)) / (av.norm() * u.norm() + v.norm() * atu.norm());
}

// Half-sample reflection, written independently of the operator code.
Index reflect(Index i, Index n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
  return i;
}

Matrix blur_2d_dense(Index nx, Index ny, double sigma, Boundary boundary) {
  const Index r = std::max<Index>(1, static_cast<Index>(std::ceil(3.0 * sigma)));
  std::vector<double> g;
  double sum = 0.0;
  for (Index k = -r; k <= r; ++k) {
    g.push_back(std::exp(-double(k * k) / (2.0 * sigma * sigma)));
    sum += g.back();
  }
  for (double& v : g) v /= sum;
  auto one_d = [&](Index n) {
    Matrix m = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index k = -r; k <= r; ++k) {
        const Index j = i - k;
        if (boundary == Boundary::zero && (j < 0 || j >= n)) continue;
        m(i, reflect(j, n)) += g[static_cast<std::size_t>(k + r)];
      }
    }
    return m;
  };
  // Column-major image: pixel (row i, col j) sits at i + ny * j.
  const Matrix rows_pass = one_d(ny);
  const Matrix cols_pass = one_d(nx);
  Matrix a(nx * ny, nx * ny);
  for (Index j = 0; j < nx; ++j)
    for (Index i = 0; i < ny; ++i)
      for (Index jj = 0; jj < nx; ++jj)
        for (Index ii = 0; ii < ny; ++ii)
          a(i + ny * j, ii + ny * jj) = rows_pass(i, ii) * cols_pass(j, jj);
  return a;
}

// Length of the line {p0 + s d} inside [-h, h]^2 by direct slab clipping.
double chord_length(double t, double theta, double h) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double px = -t * s;
  const double py = t * c;
  double lo = -1e300;
  double hi = 1e300;
  const double p[2] = {px, py};
  const double d[2] = {c, s};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(d[a]) < 1e-14) {
      if (std::abs(p[a]) > h) return 0.0;
      continue;
    }
    double s1 = (-h - p[a]) / d[a];
    double s2 = (h - p[a]) / d[a];
    if (s1 > s2) std::swap(s1, s2);
    lo = std::max(lo, s1);
    hi = std::min(hi, s2);
  }
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace

TEST_CASE("1D Gaussian blur entries follow the closed form") {
  const LinearOperator a = make_gaussian_blur_1d(64);
  const Matrix m = *a.materialize();
  const double diag = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  CHECK(m(10, 10) == doctest::Approx(0.1994711402).epsilon(1e-9));
  CHECK(m(10, 10) == doctest::Approx(diag).epsilon(1e-15));
  CHECK(m(10, 12) == doctest::Approx(0.1209853623).epsilon(1e-9));
  CHECK(m(12, 10) == doctest::Approx(std::exp(-0.5) * diag).epsilon(1e-15));

  const Matrix one = *make_gaussian_blur_1d(1).materialize();
  CHECK(one.rows() == 1);
  CHECK(one(0, 0) == doctest::Approx(diag).epsilon(1e-15));
}

TEST_CASE("1D Gaussian blur is exactly symmetric") {
  const Matrix m = *make_gaussian_blur_1d(64).materialize();
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("1D blur applied to e1 matches the explicit dense column") {
  const LinearOperator a = make_gaussian_blur_1d(64);
  const double scale = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  Vector e1 = Vector::Zero(64);
  e1[0] = 1.0;
  const Vector col = a.apply(e1);
  double worst = 0.0;
  for (Index i = 0; i < 64; ++i) {
    worst = std::max(worst, std::abs(col[i] - scale * std::exp(-double(i * i) / 8.0)));
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("identity operator and linearity") {
  const LinearOperator id = make_identity(5);
  const Vector x = oracle::random_vector(5, 3);
  CHECK((id.apply(x) - x).norm() == 0.0);
  CHECK((id.apply_adjoint(x) - x).norm() == 0.0);
  for (const LinearOperator& op :
       {make_gaussian_blur_1d(16), make_gaussian_blur_2d(5, 4, 1.0, Boundary::zero),
        make_tomography(6, 5, 9)}) {
    CHECK(op.apply(Vector::Zero(op.cols())).norm() == 0.0);
    CHECK(op.apply_adjoint(Vector::Zero(op.rows())).norm() == 0.0);
  }
}

TEST_CASE("operators reject mismatched lengths") {
  const LinearOperator a = make_tomography(4, 3, 6);
  CHECK_THROWS_AS(a.apply(Vector::Zero(15)), DimensionError);
  CHECK_THROWS_AS(a.apply_adjoint(Vector::Zero(16)), DimensionError);
  CHECK_THROWS(make_gaussian_blur_2d(4, 4, 0.0, Boundary::zero));
  CHECK_THROWS(make_tomography(1, 3, 3));
}

TEST_CASE("2D blur with a vanishing kernel width is the identity") {
  const LinearOperator a = make_gaussian_blur_2d(9, 9, 0.05, Boundary::zero);
  Vector delta = Vector::Zero(81);
  delta[4 + 9 * 4] = 1.0;
  CHECK((a.apply(delta) - delta).norm() <= 1e-12);
}

TEST_CASE("2D blur with reflexive boundary preserves constants") {
  for (double sigma : {0.7, 1.5, 3.0}) {
    const LinearOperator a = make_gaussian_blur_2d(12, 7, sigma, Boundary::reflexive);
    const Vector ones = Vector::Ones(84);
    CHECK((a.apply(ones) - ones).lpNorm<Eigen::Infinity>() <= 1e-14);
  }
}

TEST_CASE("2D blur matches an entry-by-entry dense matrix") {
  for (Boundary bc : {Boundary::zero, Boundary::reflexive}) {
    const LinearOperator a = make_gaussian_blur_2d(8, 6, 1.2, bc);
    const Matrix expected = blur_2d_dense(8, 6, 1.2, bc);
    const Matrix got = *a.materialize();
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-15);
    const Vector v = oracle::random_vector(48, 11);
    const Vector u = oracle::random_vector(48, 12);
    CHECK(std::abs(a.apply(v).dot(u) - v.dot(a.apply_adjoint(u))) <= 1e-12);
    CHECK((a.apply_adjoint(u) - expected.transpose() * u).norm() <= 1e-13);
  }
}

TEST_CASE("random 8x8 image satisfies the adjoint identity to 1e-12") {
  const LinearOperator a = make_gaussian_blur_2d(8, 8, 1.5, Boundary::reflexive);
  const Matrix dense = blur_2d_dense(8, 8, 1.5, Boundary::reflexive);
  const Vector v = oracle::random_vector(64, 5);
  const Vector u = oracle::random_vector(64, 6);
  CHECK(std::abs(a.apply(v).dot(u) - v.dot(a.apply_adjoint(u))) <= 1e-12);
  CHECK(std::abs((dense * v).dot(u) - v.dot(dense.transpose() * u)) <= 1e-12);
}

TEST_CASE("horizontal ray through one pixel row of a 4x4 grid") {
  // One angle (0 degrees), four detectors across a width of 4: each ray runs
  // along the centre of one pixel row.
  const LinearOperator a = make_tomography(4, 1, 4, 4.0);
  const Matrix m = *a.materialize();
  for (Index ray = 0; ray < 4; ++ray) {
    const Index pixel_row = 3 - ray;  // detector offsets increase upward
    for (Index j = 0; j < 4; ++j) {
      for (Index i = 0; i < 4; ++i) {
        const double expected = i == pixel_row ? 1.0 : 0.0;
        CHECK(m(ray, i + 4 * j) == doctest::Approx(expected).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("constant image projects to the chord lengths of the image square") {
  const Index nx = 10;
  const Index n_angles = 7;
  const Index n_det = 15;
  const LinearOperator a = make_tomography(nx, n_angles, n_det);
  const Vector proj = a.apply(Vector::Ones(nx * nx));
  const double width = std::sqrt(2.0) * nx;
  for (Index k = 0; k < n_angles; ++k) {
    const double theta = (179.0 * k / (n_angles - 1)) * std::numbers::pi / 180.0;
    for (Index d = 0; d < n_det; ++d) {
      const double t = (d + 0.5) * width / n_det - 0.5 * width;
      CHECK(proj[k * n_det + d] == doctest::Approx(chord_length(t, theta, 0.5 * nx)).epsilon(1e-12));
    }
  }
}

TEST_CASE("tomography rows are nonnegative and bounded by the diagonal") {
  const Index nx = 12;
  const Matrix m = *make_tomography(nx, 30, 17).materialize();
  CHECK(m.minCoeff() >= 0.0);
  CHECK(m.rowwise().sum().maxCoeff() <= std::sqrt(2.0) * nx + 1e-12);
  CHECK(m.rows() == 30 * 17);
}

TEST_CASE("random 6x6 phantom satisfies the tomography adjoint to 1e-10") {
  const LinearOperator a = make_tomography(6, 9, 9);
  const Matrix dense = *a.materialize();
  const Vector v = oracle::random_vector(36, 21);
  const Vector u = oracle::random_vector(81, 22);
  CHECK((a.apply_adjoint(u) - dense.transpose() * u).norm() <= 1e-10 * u.norm());
  CHECK(std::abs(a.apply(v).dot(u) - v.dot(a.apply_adjoint(u))) <= 1e-10 * v.norm() * u.norm());
}

TEST_CASE("every shipped operator passes 100 random adjoint checks") {
  const std::vector<LinearOperator> ops{
      make_identity(10),
      make_dense(oracle::random_matrix(7, 5, 1)),
      make_gaussian_blur_1d(33),
      make_gaussian_blur_2d(9, 11, 1.5, Boundary::zero),
      make_gaussian_blur_2d(9, 11, 1.5, Boundary::reflexive),
      make_tomography(16, 12, 23),
  };
  for (const auto& op : ops) {
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) worst = std::max(worst, adjoint_gap(op, 1000 + s));
    CAPTURE(op.name());
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("dense materialization is limited to small operators") {
  CHECK(make_gaussian_blur_1d(LinearOperator::kMaxDenseColumns).materialize().has_value());
  CHECK_FALSE(make_identity(LinearOperator::kMaxDenseColumns + 1).materialize().has_value());
}

TEST_CASE("power iteration estimates the spectral norm") {
  const Matrix m = oracle::random_matrix(20, 12, 4);
  const double exact = Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
  CHECK(estimate_norm(make_dense(m), 200) == doctest::Approx(exact).epsilon(1e-6));
}
