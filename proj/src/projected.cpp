#include "irk/projected.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace irk {

QrFactors economic_qr(const Matrix& b) {
  if (b.cols() < 1 || b.rows() < b.cols()) {
    throw DimensionError("economic_qr: need rows >= cols >= 1");
  }
  Eigen::HouseholderQR<Matrix> qr(b);
  QrFactors out;
  out.Q = qr.householderQ() * Matrix::Identity(b.rows(), b.cols());
  out.R = qr.matrixQR().topRows(b.cols()).triangularView<Eigen::Upper>();
  return out;
}

TikhonovFamily::TikhonovFamily(const ProjectedProblem& pp) : r_(pp.R), d_(pp.d) {
  const Index i = pp.T.cols();
  require_size(pp.c.size(), pp.T.rows(), "ProjectedProblem c");
  require_size(pp.R.rows(), i, "ProjectedProblem R rows");
  require_size(pp.R.cols(), i, "ProjectedProblem R cols");
  require_size(pp.d.size(), i, "ProjectedProblem d");
  rest2_ = pp.c_perp * pp.c_perp;
  if (i == 0 || pp.T.rows() <= i) {
    rt_ = pp.T;
    ct_ = pp.c;
    return;
  }
  Eigen::HouseholderQR<Matrix> qr(pp.T);
  Vector qtc = qr.householderQ().adjoint() * pp.c;
  rt_ = qr.matrixQR().topRows(i).triangularView<Eigen::Upper>();
  ct_ = qtc.head(i);
  rest2_ += qtc.tail(qtc.size() - i).squaredNorm();
}

void TikhonovFamily::enable_fast_path() {
  if (spectral_ || rt_.cols() == 0 || rt_.rows() != rt_.cols()) return;
  constexpr double kMaxCondition = 1e6;
  const Eigen::JacobiSVD<Matrix> rsvd(r_);
  const Vector& rs = rsvd.singularValues();
  if (rs.size() == 0 || !(rs[rs.size() - 1] > 0.0) ||
      rs[0] / rs[rs.size() - 1] > kMaxCondition) {
    return;
  }
  // K = R_T R^{-1}, formed from R^T K^T = R_T^T.
  const Matrix k = r_.transpose()
                       .triangularView<Eigen::Lower>()
                       .solve(rt_.transpose())
                       .transpose();
  const Eigen::JacobiSVD<Matrix> ksvd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  v_ = ksvd.matrixV();
  sigma_ = ksvd.singularValues();
  g_ = ksvd.matrixU().transpose() * ct_;
  h_ = v_.transpose() * d_;
  spectral_ = true;
}

Vector TikhonovFamily::solve_fast(double lambda) const {
  if (!spectral_ || !(lambda > 0.0)) return solve(lambda).y;
  // u = V (S^2 + lambda)^{-1} (S g + lambda h) solves the standard-form
  // problem in u = R y.
  const Vector coeff = (sigma_.cwiseProduct(g_) + lambda * h_).array() /
                       (sigma_.array().square() + lambda);
  const Vector u = v_ * coeff;
  return r_.triangularView<Eigen::Upper>().solve(u);
}

double TikhonovFamily::residual_norm(const Vector& y) const {
  return std::sqrt((rt_ * y - ct_).squaredNorm() + rest2_);
}

ProjectedSolution TikhonovFamily::solve(double lambda) const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("solve_projected: lambda must be >= 0");
  const Index i = rt_.cols();
  ProjectedSolution out;
  if (i == 0) {
    out.y = Vector(0);
    out.residual_norm = residual_norm(out.y);
    return out;
  }
  const Index top = rt_.rows();
  const double s = std::sqrt(lambda);
  Matrix stacked(top + i, i);
  Vector rhs(top + i);
  stacked.topRows(top) = rt_;
  stacked.bottomRows(i) = s * r_;
  rhs.head(top) = ct_;
  rhs.tail(i) = s * d_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked);
  out.y = cod.solve(rhs);
  out.rank_deficient = cod.rank() < i;
  out.residual_norm = residual_norm(out.y);
  return out;
}

ProjectedSolution solve_projected(const ProjectedProblem& pp, double lambda) {
  return TikhonovFamily(pp).solve(lambda);
}

double projected_residual_norm(const ProjectedProblem& pp, const Vector& y) {
  require_size(y.size(), pp.T.cols(), "projected_residual_norm");
  return std::sqrt((pp.T * y - pp.c).squaredNorm() + pp.c_perp * pp.c_perp);
}

DiscrepancyResult discrepancy_lambda(const ProjectedProblem& pp, double b_norm, double nl,
                                     double tau_dp) {
  if (!(b_norm > 0.0)) throw std::invalid_argument("discrepancy_lambda: b_norm must be > 0");
  if (!(nl >= 0.0) || !(tau_dp > 0.0)) {
    throw std::invalid_argument("discrepancy_lambda: need nl >= 0 and tau_dp > 0");
  }
  const TikhonovFamily family(pp);
  const double target = nl * tau_dp * b_norm;
  const double tol = std::max(1e-8 * target, 1e-14 * b_norm);

  const double res0 = family.residual_norm(0.0);
  if (res0 >= target) return {0.0, res0 - target <= tol};
  const double res_max = family.residual_norm(kLambdaMax);
  if (res_max < target) return {kLambdaMax, std::abs(res_max - target) <= tol};

  double lo = std::log10(kLambdaMin);
  double hi = std::log10(kLambdaMax);
  if (family.residual_norm(kLambdaMin) >= target) {
    // Root lies in (0, 1e-12]; the residual there is within rounding of res0.
    return {kLambdaMin, true};
  }
  double mid = hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double res = family.residual_norm(std::pow(10.0, mid));
    if (std::abs(res - target) <= tol) return {std::pow(10.0, mid), true};
    if (res < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15) break;
  }
  // The bracket has collapsed onto the root of a continuous function.
  return {std::pow(10.0, 0.5 * (lo + hi)), true};
}

namespace {

struct ErrorModel {
  const TikhonovFamily& family;
  Matrix gram;      // Z^T Z
  Vector ze;        // Z^T e0
  double e0_sq;     // ||e0||^2, e0 = x_prev - x_true

  double operator()(double lambda) const {
    const Vector y = family.solve_fast(lambda);
    const double sq = e0_sq + 2.0 * y.dot(ze) + y.dot(gram * y);
    return std::sqrt(std::max(sq, 0.0));
  }

  double exact(double lambda) const {
    const Vector y = family.solve(lambda).y;
    const double sq = e0_sq + 2.0 * y.dot(ze) + y.dot(gram * y);
    return std::sqrt(std::max(sq, 0.0));
  }
};

}  // namespace

OptimalLambdaResult optimal_lambda(const ProjectedProblem& pp, const Matrix& z,
                                   const Vector& x_prev, const Vector& x_true) {
  require_size(z.cols(), pp.T.cols(), "optimal_lambda basis");
  require_size(x_prev.size(), z.rows(), "optimal_lambda x_prev");
  require_size(x_true.size(), z.rows(), "optimal_lambda x_true");
  TikhonovFamily family(pp);
  family.enable_fast_path();
  const Vector e0 = x_prev - x_true;
  const ErrorModel error{family, z.transpose() * z, z.transpose() * e0, e0.squaredNorm()};

  constexpr int kSteps = 240;  // 0.1-decade spacing on [-12, 12]
  const double lo_exp = std::log10(kLambdaMin);
  OptimalLambdaResult best{0.0, error(0.0), false};
  double best_exp = -std::numeric_limits<double>::infinity();
  double worst = best.error;
  for (int s = 0; s <= kSteps; ++s) {
    const double e = lo_exp + 0.1 * s;
    const double err = error(std::pow(10.0, e));
    worst = std::max(worst, err);
    if (err < best.error) {
      best = {std::pow(10.0, e), err, false};
      best_exp = e;
    }
  }
  const double scale = std::max(worst, std::sqrt(error.e0_sq));
  if (worst - best.error <= 1e-12 * std::max(scale, 1e-300)) {
    best.degenerate = true;
    return best;
  }
  // Golden-section refinement on the neighbouring grid cells.
  if (std::isfinite(best_exp)) {
    const double inv_phi = 0.6180339887498949;
    double a = std::max(lo_exp, best_exp - 0.1);
    double b = std::min(-lo_exp, best_exp + 0.1);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = error(std::pow(10.0, c));
    double fd = error(std::pow(10.0, d));
    for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - inv_phi * (b - a);
        fc = error(std::pow(10.0, c));
      } else {
        a = c; c = d; fc = fd;
        d = a + inv_phi * (b - a);
        fd = error(std::pow(10.0, d));
      }
    }
    const double cand = fc < fd ? c : d;
    const double fcand = std::min(fc, fd);
    if (fcand < best.error) best = {std::pow(10.0, cand), fcand, false};
  } else {
    // Best grid point is lambda = 0: refine between 0 and the first grid node.
    double a = 0.0;
    double b = kLambdaMin;
    for (int it = 0; it < 40; ++it) {
      const double m1 = a + (b - a) / 3.0;
      const double m2 = b - (b - a) / 3.0;
      if (error(m1) < error(m2)) b = m2; else a = m1;
    }
    const double cand = 0.5 * (a + b);
    const double fcand = error(cand);
    if (fcand < best.error) best = {cand, fcand, false};
  }
  best.error = error.exact(best.lambda);
  return best;
}

}  // namespace irk
