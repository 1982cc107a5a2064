#include <doctest.h>

#include <cmath>

#include "irk/krylov.hpp"
#include "irk/projected.hpp"
#include "oracles.hpp"

using namespace irk;

namespace {

ProjectedProblem scalar_problem() {
  ProjectedProblem pp;
  pp.T = Matrix(2, 1);
  pp.T << 1.0, 0.0;
  pp.c = Vector(2);
  pp.c << 1.0, 0.0;
  pp.R = Matrix::Ones(1, 1);
  pp.d = Vector::Zero(1);
  return pp;
}

ProjectedProblem random_problem(Index i, std::uint64_t seed) {
  ProjectedProblem pp;
  pp.T = oracle::random_matrix(i + 1, i, seed);
  for (Index j = 0; j < i; ++j)
    for (Index r = j + 2; r <= i; ++r) pp.T(r, j) = 0.0;  // Hessenberg
  pp.c = oracle::random_vector(i + 1, seed + 1);
  pp.R = oracle::random_matrix(i, i, seed + 2).triangularView<Eigen::Upper>();
  pp.R.diagonal().array() += 3.0;
  pp.d = oracle::random_vector(i, seed + 3);
  return pp;
}

}  // namespace

TEST_CASE("economic QR examples") {
  const Matrix q0 = oracle::krylov_basis(oracle::random_matrix(6, 6, 1), oracle::random_vector(6, 2), 3);
  const QrFactors f = economic_qr(q0);
  CHECK((f.R.cwiseAbs() - Matrix::Identity(3, 3)).norm() <= 1e-12);
  CHECK((f.Q * f.R - q0).norm() <= 1e-12);

  Matrix b = Matrix::Zero(3, 1);
  b(0, 0) = 2.0;
  const QrFactors g = economic_qr(b);
  CHECK(std::abs(g.R(0, 0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(g.Q(0, 0)) == doctest::Approx(1.0).epsilon(1e-15));

  const Matrix r = oracle::random_matrix(10, 4, 3);
  const QrFactors h = economic_qr(r);
  CHECK((h.Q * h.R - r).norm() <= 1e-12 * r.norm());
  CHECK((h.Q.transpose() * h.Q - Matrix::Identity(4, 4)).norm() <= 1e-12);
  CHECK(h.R.isUpperTriangular(0.0));
  CHECK_THROWS(economic_qr(Matrix::Zero(2, 3)));
}

TEST_CASE("solve_projected scalar closed form") {
  const ProjectedSolution s = solve_projected(scalar_problem(), 1.0);
  CHECK(s.y[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(s.rank_deficient);
}

TEST_CASE("solve_projected with zero lambda is least squares on T") {
  const ProjectedProblem pp = random_problem(5, 10);
  const Vector y = solve_projected(pp, 0.0).y;
  const Vector ls = pp.T.colPivHouseholderQr().solve(pp.c);
  CHECK(oracle::rel_diff(y, ls) <= 1e-12);
}

TEST_CASE("solve_projected matches the normal-equations oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ProjectedProblem pp = random_problem(4, 100 + 7 * seed);
    for (double lambda : {1e-6, 0.01, 0.3, 1.0, 50.0}) {
      const Vector y = solve_projected(pp, lambda).y;
      const Vector ref = oracle::projected_normal_equations(pp.T, pp.c, pp.R, pp.d, lambda);
      CHECK(oracle::rel_diff(y, ref) <= 1e-10);
    }
  }
}

TEST_CASE("rank-deficient R yields a minimum-norm solution") {
  ProjectedProblem pp;
  pp.T = Matrix::Zero(3, 2);
  pp.T(0, 0) = 1.0;
  pp.c = Vector::Ones(3);
  pp.R = Matrix::Zero(2, 2);
  pp.d = Vector::Zero(2);
  const ProjectedSolution s = solve_projected(pp, 1.0);
  CHECK(s.rank_deficient);
  CHECK(s.y[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(s.y[1]) <= 1e-14);
}

TEST_CASE("projected residual norm examples") {
  const ProjectedProblem pp = random_problem(4, 5);
  CHECK(projected_residual_norm(pp, Vector::Zero(4)) == doctest::Approx(pp.c.norm()).epsilon(1e-15));
  ProjectedProblem sq = pp;
  sq.T = pp.T.topRows(4);
  sq.c = pp.c.head(4);
  const Vector y = solve_projected(sq, 0.0).y;
  CHECK(projected_residual_norm(sq, y) <= 1e-12 * sq.c.norm());
}

TEST_CASE("projected residual equals the full-space residual") {
  const Index n = 12;
  const Matrix m = oracle::random_matrix(n, n, 60);
  const LinearOperator a = make_dense(m);
  const Vector b = oracle::random_vector(n, 61);
  const Vector x_prev = oracle::random_vector(n, 62);
  const Vector r = b - m * x_prev;
  FlexibleArnoldi s = FlexibleArnoldi::start(r);
  const RegOperator l = RegOperator::identity(n);
  for (int j = 0; j < 5; ++j) s.step(a, unit_weights(n), l);
  ProjectedProblem pp;
  pp.T = s.H();
  pp.c = Matrix(s.V()).transpose() * r;
  pp.R = Matrix::Identity(5, 5);
  pp.d = Vector::Zero(5);
  const Vector y = oracle::random_vector(5, 63);
  const double full = (m * (x_prev + Matrix(s.Z()) * y) - b).norm();
  CHECK(projected_residual_norm(pp, y) == doctest::Approx(full).epsilon(1e-10));
}

TEST_CASE("c_perp accounts for the residual outside the image basis") {
  ProjectedProblem pp = random_problem(3, 8);
  pp.c_perp = 2.0;
  const Vector y = Vector::Zero(3);
  CHECK(projected_residual_norm(pp, y) == doctest::Approx(std::hypot(pp.c.norm(), 2.0)));
  CHECK(TikhonovFamily(pp).residual_norm(y) == doctest::Approx(std::hypot(pp.c.norm(), 2.0)));
}

TEST_CASE("residual norm is nondecreasing in lambda") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ProjectedProblem pp = random_problem(6, 400 + seed);
    const TikhonovFamily fam(pp);
    double prev = fam.residual_norm(0.0);
    for (int e = -12; e <= 12; ++e) {
      const double cur = fam.residual_norm(std::pow(10.0, 0.5 * e));
      CHECK(cur >= prev * (1.0 - 1e-12));
      prev = cur;
    }
  }
}

TEST_CASE("discrepancy lambda: scalar closed form") {
  // y = 1 / (1 + lambda), residual = lambda / (1 + lambda) = 0.5 at lambda = 1.
  const DiscrepancyResult r = discrepancy_lambda(scalar_problem(), 1.0, 0.5, 1.0);
  CHECK(r.attained);
  CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-7));
  const TikhonovFamily fam(scalar_problem());
  CHECK(std::abs(fam.residual_norm(r.lambda) - 0.5) <= 1e-8 * 0.5);
}

TEST_CASE("discrepancy lambda below the zero-lambda residual returns zero") {
  ProjectedProblem pp = random_problem(3, 20);
  pp.c_perp = 1.0;
  const double res0 = TikhonovFamily(pp).residual_norm(0.0);
  const DiscrepancyResult r = discrepancy_lambda(pp, 1.0, 0.5 * res0, 1.0);
  CHECK(r.lambda == 0.0);
  CHECK_FALSE(r.attained);
}

TEST_CASE("discrepancy lambda with zero noise") {
  ProjectedProblem pp = random_problem(3, 21);
  pp.T = Matrix(pp.T.topRows(3));
  pp.c = Vector(pp.c.head(3));
  const DiscrepancyResult exact = discrepancy_lambda(pp, pp.c.norm(), 0.0, 1.0);
  CHECK(exact.lambda == 0.0);
  ProjectedProblem tall = random_problem(3, 22);
  const DiscrepancyResult inexact = discrepancy_lambda(tall, tall.c.norm(), 0.0, 1.0);
  CHECK(inexact.lambda == 0.0);
  CHECK_FALSE(inexact.attained);
}

TEST_CASE("discrepancy lambda hits the target on random problems") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const ProjectedProblem pp = random_problem(5, 700 + seed);
    const TikhonovFamily fam(pp);
    const double lo = fam.residual_norm(0.0);
    const double hi = fam.residual_norm(1e12);
    const double b_norm = 3.0;
    const double target = lo + 0.37 * (hi - lo);
    const DiscrepancyResult r = discrepancy_lambda(pp, b_norm, target / b_norm, 1.0);
    CHECK(r.attained);
    CHECK(std::abs(fam.residual_norm(r.lambda) - target) <= 1e-8 * target);
  }
}

TEST_CASE("discrepancy lambda rejects invalid arguments") {
  CHECK_THROWS(discrepancy_lambda(scalar_problem(), 0.0, 0.1, 1.0));
  CHECK_THROWS(discrepancy_lambda(scalar_problem(), 1.0, -0.1, 1.0));
  CHECK_THROWS(discrepancy_lambda(scalar_problem(), 1.0, 0.1, 0.0));
  CHECK_THROWS(solve_projected(scalar_problem(), -1.0));
}

TEST_CASE("optimal lambda beats a dense 1000-point grid") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Index n = 15;
    const Index i = 5;
    const ProjectedProblem pp = random_problem(i, 900 + seed);
    const Matrix z = oracle::random_matrix(n, i, 950 + seed);
    const Vector x_prev = oracle::random_vector(n, 960 + seed);
    const Vector x_true = oracle::random_vector(n, 970 + seed);
    const OptimalLambdaResult best = optimal_lambda(pp, z, x_prev, x_true);
    double grid_min = 1e300;
    for (int k = 0; k < 1000; ++k) {
      const double lambda = std::pow(10.0, -12.0 + 24.0 * k / 999.0);
      const Vector y = oracle::projected_normal_equations(pp.T, pp.c, pp.R, pp.d, lambda);
      grid_min = std::min(grid_min, (x_prev + z * y - x_true).norm());
    }
    const Vector y_best = solve_projected(pp, best.lambda).y;
    const double achieved = (x_prev + z * y_best - x_true).norm();
    CHECK(achieved == doctest::Approx(best.error).epsilon(1e-9));
    CHECK(best.error <= grid_min + 1e-9);
  }
}

TEST_CASE("optimal lambda recovers an exactly reachable solution") {
  const Index n = 10;
  const Index i = 3;
  ProjectedProblem pp = random_problem(i, 31);
  const Matrix z = oracle::random_matrix(n, i, 32);
  const Vector x_prev = oracle::random_vector(n, 33);
  const double lambda_star = 0.02;
  const Vector y_star = solve_projected(pp, lambda_star).y;
  const Vector x_true = x_prev + z * y_star;
  const OptimalLambdaResult best = optimal_lambda(pp, z, x_prev, x_true);
  for (int e = -12; e <= 12; ++e) {
    const Vector y = solve_projected(pp, std::pow(10.0, e)).y;
    CHECK(best.error <= (x_prev + z * y - x_true).norm() + 1e-12);
  }
  CHECK(best.error <= 1e-6 * x_true.norm());
}

TEST_CASE("optimal lambda flags a flat error curve") {
  const Index n = 6;
  ProjectedProblem pp = random_problem(2, 40);
  Matrix z = Matrix::Zero(n, 2);
  z(0, 0) = 1.0;
  z(1, 1) = 1.0;
  Vector x_prev = Vector::Zero(n);
  Vector x_true = Vector::Zero(n);
  x_true[0] = 1.0;
  // Columns of Z orthogonal to x_true - x_prev with a zero projected problem:
  // every lambda gives the same error.
  pp.c.setZero();
  pp.d.setZero();
  x_true.setZero();
  x_true[4] = 1.0;
  const OptimalLambdaResult r = optimal_lambda(pp, z, x_prev, x_true);
  CHECK(r.degenerate);
  CHECK(r.error == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fast spectral path agrees with the exact solve") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ProjectedProblem pp = random_problem(6, 1200 + seed);
    TikhonovFamily fam(pp);
    fam.enable_fast_path();
    CHECK(fam.has_fast_path());
    for (double lambda : {1e-8, 1e-3, 0.5, 10.0, 1e6}) {
      CHECK(oracle::rel_diff(fam.solve_fast(lambda), fam.solve(lambda).y) <= 1e-9);
    }
  }
}
