#ifndef IRK_PROBLEMS_HPP
#define IRK_PROBLEMS_HPP

#include <cstdint>
#include <string>

#include "irk/operators.hpp"
#include "irk/regularization.hpp"
#include "irk/types.hpp"

namespace irk {

/// Four Gaussian peaks on an exactly zero background. Peak centres sit at
/// round(n * {0.25, 0.42, 0.5, 0.75}) with heights {1, 0.5, 0.8, 0.3}; each
/// peak has half-width r = max(1, round(n / 64)), standard deviation r / 2,
/// and is truncated to zero beyond r. Requires n >= 16.
Vector spectra_signal(Index n);

/// nx-by-nx image with exactly round(density * nx^2) distinct nonzero
/// pixels, each with value 0.1 + 0.9 u, u uniform in [0, 1).
Vector star_field(Index nx, double density, std::uint64_t seed);

/// Modified (high-contrast) ten-ellipse Shepp-Logan head phantom, sampled at
/// pixel centres on [-1, 1]^2 and flattened column-major.
Vector shepp_logan(Index nx);

struct NoisyData {
  Vector b;
  Vector e;
};

/// e = nl * ||b_clean|| * g / ||g|| with g standard normal from the seeded
/// generator, so ||e|| / ||b_clean|| = nl.
NoisyData add_noise(const Vector& b_clean, double nl, std::uint64_t seed);

/// ||x - x_true|| / ||x_true||. Throws std::invalid_argument for x_true = 0.
double relative_error(const Vector& x, const Vector& x_true);

enum class ProblemKind { spectra_1d, blur_2d, ct };

const char* to_string(ProblemKind kind);

struct ProblemParams {
  ProblemKind kind = ProblemKind::spectra_1d;
  Index n = 64;             // spectra length
  double noise_level = 0.01;
  Index nx = 64;            // image side (blur_2d, ct)
  double psf_sigma = 1.5;   // blur_2d
  Boundary boundary = Boundary::reflexive;
  double density = 0.072;   // blur_2d star field
  Index n_angles = 90;      // ct
  Index n_detectors = 0;    // ct; 0 selects ceil(sqrt(2) * nx)
  RegKind regularization = RegKind::identity;
};

struct TestProblem {
  LinearOperator A;
  Vector b;
  Vector b_clean;
  Vector e;
  Vector x_true;
  double nl = 0.0;
  std::uint64_t seed = 0;
  RegOperator L;
  ProblemKind kind = ProblemKind::spectra_1d;
  /// Image rows and columns (1 x n for signals).
  Index image_rows = 1;
  Index image_cols = 1;
};

/// Builds a problem instance; a pure function of (params, seed).
TestProblem make_problem(const ProblemParams& params, std::uint64_t seed);

}  // namespace irk

#endif  // IRK_PROBLEMS_HPP
