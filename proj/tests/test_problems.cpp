#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "irk/fixture_io.hpp"
#include "irk/problems.hpp"
#include "irk/random.hpp"
#include "oracles.hpp"

using namespace irk;

namespace {

const std::filesystem::path kFixtures = IRK_FIXTURE_DIR;

bool bit_identical(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

int count_local_maxima(const Vector& x, double floor) {
  int count = 0;
  for (Index i = 0; i < x.size(); ++i) {
    const double left = i > 0 ? x[i - 1] : -1.0;
    const double right = i + 1 < x.size() ? x[i + 1] : -1.0;
    if (x[i] > floor && x[i] > left && x[i] >= right) ++count;
  }
  return count;
}

// Additive intensity of the modified head phantom at a point, evaluated
// from the standard ellipse list.
double phantom_at(double x, double y) {
  struct E { double v, a, b, x0, y0, phi; };
  const E table[] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},      {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},  {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},     {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},   {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0}, {0.1, 0.023, 0.046, 0.06, -0.605, 0.0}};
  double sum = 0.0;
  for (const E& e : table) {
    const double t = e.phi * std::acos(-1.0) / 180.0;
    const double u = ((x - e.x0) * std::cos(t) + (y - e.y0) * std::sin(t)) / e.a;
    const double v = (-(x - e.x0) * std::sin(t) + (y - e.y0) * std::cos(t)) / e.b;
    if (u * u + v * v <= 1.0) sum += e.v;
  }
  return sum;
}

}  // namespace

TEST_CASE("spectra signal has four peaks on a zero background") {
  const Vector x = spectra_signal(64);
  CHECK(count_local_maxima(x, 1e-3) == 4);
  CHECK(x.minCoeff() >= 0.0);
  Index small = 0;
  for (Index i = 0; i < x.size(); ++i) small += x[i] < 1e-10 ? 1 : 0;
  CHECK(double(small) >= 0.8 * 64);
  CHECK(x[16] == 1.0);
  CHECK(x[27] == 0.5);
  CHECK(x[32] == 0.8);
  CHECK(x[48] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(x[5] == 0.0);
  for (Index n : {64, 100, 256, 1000}) {
    CAPTURE(n);
    CHECK(count_local_maxima(spectra_signal(n), 1e-3) == 4);
  }
  CHECK_THROWS(spectra_signal(15));
}

TEST_CASE("spectra signal matches the committed golden fixture") {
  RawHeader header;
  const Vector golden = read_raw_vector(kFixtures / "spectra_n64.raw", &header);
  CHECK(header.shape == std::vector<Index>{64});
  CHECK(bit_identical(spectra_signal(64), golden));
}

TEST_CASE("noise realization matches the committed golden fixture") {
  const Vector golden = read_raw_vector(kFixtures / "spectra_n64_noise_seed0.raw");
  CHECK(bit_identical(make_problem(ProblemParams{}, 0).e, golden));
  const Vector stars = read_raw_vector(kFixtures / "star_field_nx16_seed3.raw");
  CHECK(bit_identical(star_field(16, 0.072, 3), stars));
}

TEST_CASE("star field density and reproducibility") {
  const Vector x = star_field(64, 0.072, 5);
  Index nonzero = 0;
  for (Index i = 0; i < x.size(); ++i) nonzero += x[i] > 1e-10 ? 1 : 0;
  CHECK(std::abs(double(nonzero) / 4096.0 - 0.072) <= 0.01);
  CHECK(x.minCoeff() >= 0.0);
  CHECK(x.maxCoeff() < 1.0);
  CHECK(star_field(64, 0.0, 5).norm() == 0.0);
  CHECK(bit_identical(star_field(64, 0.072, 5), x));
  CHECK_FALSE(bit_identical(star_field(64, 0.072, 6), x));
  CHECK_THROWS(star_field(8, 1.0, 0));
}

TEST_CASE("Shepp-Logan phantom geometry") {
  const Index nx = 128;
  const Vector x = shepp_logan(nx);
  CHECK(x.minCoeff() >= 0.0);
  CHECK(x.maxCoeff() <= 1.0);
  const double h = 2.0 / nx;
  const Index c = nx / 2;
  const double px = -1.0 + (c + 0.5) * h;
  const double py = 1.0 - (c + 0.5) * h;
  CHECK(x[c + nx * c] == doctest::Approx(std::clamp(phantom_at(px, py), 0.0, 1.0)).epsilon(1e-14));
  CHECK(phantom_at(0.0, 0.0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(x[c + nx * c] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(x[0] == 0.0);
  CHECK(x[nx - 1] == 0.0);
  CHECK(x[nx * (nx - 1)] == 0.0);
  CHECK(x[nx * nx - 1] == 0.0);
  for (Index size : {16, 64, 128}) {
    const Vector img = shepp_logan(size);
    const double hs = 2.0 / size;
    for (Index j = 0; j < size; ++j) {
      for (Index i = 0; i < size; ++i) {
        const double u = (-1.0 + (j + 0.5) * hs) / 0.69;
        const double v = (1.0 - (i + 0.5) * hs) / 0.92;
        if (u * u + v * v > 1.0) CHECK(img[i + size * j] == 0.0);
      }
    }
  }
}

TEST_CASE("add_noise hits the requested level exactly") {
  const Vector b = oracle::random_vector(200, 77);
  const NoisyData zero = add_noise(b, 0.0, 1);
  CHECK(zero.e.norm() == 0.0);
  CHECK(bit_identical(zero.b, b));
  for (double nl : {1e-3, 0.01, 0.5}) {
    const NoisyData d = add_noise(b, nl, 3);
    CHECK(std::abs(d.e.norm() / b.norm() - nl) <= 1e-14 * nl);
    CHECK(bit_identical(d.b, Vector(b + d.e)));
  }
  CHECK(bit_identical(add_noise(b, 0.1, 9).e, add_noise(b, 0.1, 9).e));
  CHECK_THROWS(add_noise(Vector::Zero(3), 0.1, 0));
  CHECK_THROWS(add_noise(b, -0.1, 0));
}

TEST_CASE("relative error examples") {
  const Vector t = oracle::random_vector(10, 1);
  CHECK(relative_error(t, t) == 0.0);
  CHECK(relative_error(Vector::Zero(10), t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(relative_error(2.0 * t, t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(relative_error(t, Vector::Zero(10)));
}

TEST_CASE("generated problems satisfy their invariants for seeds 0..9") {
  for (ProblemKind kind : {ProblemKind::spectra_1d, ProblemKind::blur_2d, ProblemKind::ct}) {
    ProblemParams params;
    params.kind = kind;
    params.nx = 24;
    params.noise_level = kind == ProblemKind::spectra_1d ? 0.01 : 0.5;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CAPTURE(to_string(kind));
      CAPTURE(seed);
      const TestProblem tp = make_problem(params, seed);
      CHECK(bit_identical(tp.b, Vector(tp.b_clean + tp.e)));
      CHECK((tp.A.apply(tp.x_true) - tp.b_clean).norm() <= 1e-14 * tp.b_clean.norm());
      CHECK(std::abs(tp.e.norm() / tp.b_clean.norm() - tp.nl) <= 1e-14 * tp.nl);
      const TestProblem again = make_problem(params, seed);
      CHECK(bit_identical(again.b, tp.b));
      CHECK(bit_identical(again.x_true, tp.x_true));
    }
  }
}

TEST_CASE("CT problems default to ceil(sqrt(2) nx) detectors") {
  ProblemParams params;
  params.kind = ProblemKind::ct;
  params.nx = 32;
  params.n_angles = 10;
  const TestProblem tp = make_problem(params, 0);
  CHECK(tp.A.rows() == 10 * 46);
  CHECK(tp.A.cols() == 32 * 32);
  CHECK(tp.image_rows == 32);
}

TEST_CASE("random generator is platform-stable and stream-separated") {
  Rng a(42, 0);
  Rng b(42, 0);
  Rng c(42, 1);
  bool all_equal = true;
  bool any_diff_stream = false;
  for (int i = 0; i < 100; ++i) {
    const double ua = a.uniform();
    all_equal = all_equal && ua == b.uniform();
    any_diff_stream = any_diff_stream || ua != c.uniform();
    CHECK(ua >= 0.0);
    CHECK(ua < 1.0);
  }
  CHECK(all_equal);
  CHECK(any_diff_stream);
  // Mean and variance of the normal sampler over many draws.
  Rng g(7, 3);
  const Vector v = g.normal_vector(200000);
  CHECK(std::abs(v.mean()) <= 0.01);
  CHECK(std::abs((v.array() - v.mean()).square().mean() - 1.0) <= 0.02);
  Rng u(1, 1);
  for (int i = 0; i < 1000; ++i) CHECK(u.below(7) < 7);
}

TEST_CASE("raw vector round trip and header validation") {
  const auto dir = std::filesystem::temp_directory_path() / "irk_raw_test";
  std::filesystem::create_directories(dir);
  const Vector v = oracle::random_vector(12, 3);
  write_raw_vector(dir / "v.raw", v, {{3, 4}, "column_major", "test"});
  RawHeader h;
  CHECK(bit_identical(read_raw_vector(dir / "v.raw", &h), v));
  CHECK(h.shape == std::vector<Index>{3, 4});
  CHECK(h.description == "test");
  CHECK(std::filesystem::file_size(dir / "v.raw") == 96);
  CHECK_THROWS(write_raw_vector(dir / "w.raw", v, {{5}, "column_major", ""}));
  std::filesystem::resize_file(dir / "v.raw", 88);
  CHECK_THROWS(read_raw_vector(dir / "v.raw"));
  std::filesystem::remove_all(dir);
}
