#include "irk/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "irk/random.hpp"

namespace irk {

namespace {

constexpr std::uint64_t kImageStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

struct Ellipse {
  double intensity;
  double a;
  double b;
  double x0;
  double y0;
  double phi_deg;
};

// Modified Shepp-Logan table with enhanced contrast.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

double phantom_value(double x, double y) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  double value = 0.0;
  for (const Ellipse& e : kSheppLogan) {
    const double c = std::cos(e.phi_deg * kDeg);
    const double s = std::sin(e.phi_deg * kDeg);
    const double dx = x - e.x0;
    const double dy = y - e.y0;
    const double u = (dx * c + dy * s) / e.a;
    const double v = (-dx * s + dy * c) / e.b;
    if (u * u + v * v <= 1.0) value += e.intensity;
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

Vector spectra_signal(Index n) {
  if (n < 16) throw std::invalid_argument("spectra_signal: n must be >= 16");
  constexpr std::array<double, 4> kCentres{0.25, 0.42, 0.5, 0.75};
  constexpr std::array<double, 4> kHeights{1.0, 0.5, 0.8, 0.3};
  const Index radius = std::max<Index>(1, std::llround(static_cast<double>(n) / 64.0));
  const double sigma = 0.5 * static_cast<double>(radius);
  Vector x = Vector::Zero(n);
  for (std::size_t p = 0; p < kCentres.size(); ++p) {
    const Index c = std::llround(kCentres[p] * static_cast<double>(n));
    for (Index i = std::max<Index>(0, c - radius); i <= std::min<Index>(n - 1, c + radius); ++i) {
      const double d = static_cast<double>(i - c);
      x[i] += kHeights[p] * std::exp(-d * d / (2.0 * sigma * sigma));
    }
  }
  return x;
}

Vector star_field(Index nx, double density, std::uint64_t seed) {
  if (nx < 1) throw std::invalid_argument("star_field: nx must be >= 1");
  if (!(density >= 0.0) || !(density < 1.0)) {
    throw std::invalid_argument("star_field: density must lie in [0, 1)");
  }
  const Index total = nx * nx;
  const Index stars = std::llround(density * static_cast<double>(total));
  Rng rng(seed, kImageStream);
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  Vector x = Vector::Zero(total);
  for (Index s = 0; s < stars; ++s) {
    const auto pick = s + static_cast<Index>(rng.below(static_cast<std::uint64_t>(total - s)));
    std::swap(order[static_cast<std::size_t>(s)], order[static_cast<std::size_t>(pick)]);
    x[order[static_cast<std::size_t>(s)]] = 0.1 + 0.9 * rng.uniform();
  }
  return x;
}

Vector shepp_logan(Index nx) {
  if (nx < 16) throw std::invalid_argument("shepp_logan: nx must be >= 16");
  Vector x(nx * nx);
  const double h = 2.0 / static_cast<double>(nx);
  for (Index j = 0; j < nx; ++j) {
    const double px = -1.0 + (static_cast<double>(j) + 0.5) * h;
    for (Index i = 0; i < nx; ++i) {
      const double py = 1.0 - (static_cast<double>(i) + 0.5) * h;
      x[i + nx * j] = phantom_value(px, py);
    }
  }
  return x;
}

NoisyData add_noise(const Vector& b_clean, double nl, std::uint64_t seed) {
  if (!(nl >= 0.0)) throw std::invalid_argument("add_noise: nl must be >= 0");
  NoisyData out;
  if (nl == 0.0) {
    out.e = Vector::Zero(b_clean.size());
    out.b = b_clean;
    return out;
  }
  const double scale = b_clean.norm();
  if (scale == 0.0) throw std::invalid_argument("add_noise: b_clean must be nonzero");
  Rng rng(seed, kNoiseStream);
  const Vector g = rng.normal_vector(b_clean.size());
  out.e = (nl * scale / g.norm()) * g;
  out.b = b_clean + out.e;
  return out;
}

double relative_error(const Vector& x, const Vector& x_true) {
  require_size(x.size(), x_true.size(), "relative_error");
  const double denom = x_true.norm();
  if (denom == 0.0) throw std::invalid_argument("relative_error: x_true is zero");
  return (x - x_true).norm() / denom;
}

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::spectra_1d: return "spectra_1d";
    case ProblemKind::blur_2d: return "blur_2d";
    case ProblemKind::ct: return "ct";
  }
  return "unknown";
}

TestProblem make_problem(const ProblemParams& params, std::uint64_t seed) {
  Vector x_true;
  Index rows = 1;
  Index cols = 1;
  std::optional<LinearOperator> a;
  switch (params.kind) {
    case ProblemKind::spectra_1d:
      x_true = spectra_signal(params.n);
      a = make_gaussian_blur_1d(params.n);
      cols = params.n;
      break;
    case ProblemKind::blur_2d:
      x_true = star_field(params.nx, params.density, seed);
      a = make_gaussian_blur_2d(params.nx, params.nx, params.psf_sigma, params.boundary);
      rows = cols = params.nx;
      break;
    case ProblemKind::ct: {
      x_true = shepp_logan(params.nx);
      const Index detectors =
          params.n_detectors > 0
              ? params.n_detectors
              : static_cast<Index>(std::ceil(std::sqrt(2.0) * static_cast<double>(params.nx)));
      a = make_tomography(params.nx, params.n_angles, detectors);
      rows = cols = params.nx;
      break;
    }
  }
  Vector b_clean = a->apply(x_true);
  NoisyData noisy = add_noise(b_clean, params.noise_level, seed);
  return TestProblem{*a,
                     std::move(noisy.b),
                     std::move(b_clean),
                     std::move(noisy.e),
                     std::move(x_true),
                     params.noise_level,
                     seed,
                     RegOperator(params.regularization, a->cols()),
                     params.kind,
                     rows,
                     cols};
}

}  // namespace irk
