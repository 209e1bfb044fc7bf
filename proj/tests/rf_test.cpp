#include "tsg/rf.hpp"

#include <cmath>

#include "doctest.h"
#include "tsg/errors.hpp"
#include "tsg/rng.hpp"

using namespace tsg;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

Vector random_point(RngStream& rng, int d, double scale = 1.0) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.next_gaussian();
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("rf");

TEST_CASE("spawn is a pure function of its arguments") {
  const KernelSpec spec{0.7};
  const FeatureBlock a = spawn_feature_block(42, 3, 16, 4, spec);
  const FeatureBlock b = spawn_feature_block(42, 3, 16, 4, spec);
  CHECK((a.directions.array() == b.directions.array()).all());
  CHECK((a.phases.array() == b.phases.array()).all());
}

TEST_CASE("consecutive iteration indices give different blocks") {
  const KernelSpec spec{1.0};
  const FeatureBlock a = spawn_feature_block(42, 5, 8, 3, spec);
  const FeatureBlock b = spawn_feature_block(42, 6, 8, 3, spec);
  CHECK((a.directions - b.directions).cwiseAbs().maxCoeff() > 1e-12);
}

TEST_CASE("phases lie in [0, 2pi)") {
  const FeatureBlock block = spawn_feature_block(7, 1, 4096, 2, KernelSpec{1.0});
  CHECK(block.phases.minCoeff() >= 0.0);
  CHECK(block.phases.maxCoeff() < 2.0 * M_PI);
}

TEST_CASE("direction variance matches the spectral measure") {
  // Var = 2*sigma; Monte Carlo with m = 1e5 should land within 5%.
  const double sigma = 0.5;
  const FeatureBlock block = spawn_feature_block(11, 1, 100000, 1, KernelSpec{sigma});
  const double mean = block.directions.col(0).mean();
  const double var =
      (block.directions.col(0).array() - mean).square().sum() / (block.directions.rows() - 1);
  CHECK(var == doctest::Approx(2.0 * sigma).epsilon(0.05));
}

TEST_CASE("invalid block parameters are rejected") {
  CHECK_THROWS_AS(spawn_feature_block(1, 1, 0, 3, KernelSpec{1.0}), ConfigError);
  CHECK_THROWS_AS(spawn_feature_block(1, 1, 4, 0, KernelSpec{1.0}), ConfigError);
  CHECK_THROWS_AS(spawn_feature_block(1, 1, 4, 3, KernelSpec{0.0}), ConfigError);
  CHECK_THROWS_AS(spawn_feature_block(1, 1, 4, 3, KernelSpec{-2.0}), ConfigError);
}

TEST_CASE("feature entries follow sqrt(2/m) cos(wx + b)") {
  FeatureBlock block;
  block.sigma = 1.0;
  block.directions = Matrix::Zero(1, 1);
  block.phases = Vector::Zero(1);

  CHECK(feature_vector(block, vec1(3.7))[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  block.phases[0] = M_PI / 2.0;
  CHECK(feature_vector(block, vec1(-1.0))[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("feature entries are bounded by sqrt(2/m)") {
  RngStream rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_word() % 64);
    const FeatureBlock block = spawn_feature_block(trial, 1, m, 3, KernelSpec{2.0});
    const Vector f = feature_vector(block, random_point(rng, 3, 2.0));
    CHECK(f.cwiseAbs().maxCoeff() <= std::sqrt(2.0 / m) + 1e-15);
  }
}

TEST_CASE("sparse and dense feature paths agree exactly") {
  const FeatureBlock block = spawn_feature_block(9, 2, 32, 6, KernelSpec{0.8});
  SparseVec sx;
  sx.idx = {1, 4};
  sx.val = {0.5, -2.0};
  const Vector dense = sx.to_dense(6);
  CHECK((feature_vector(block, sx).array() == feature_vector(block, dense).array()).all());
}

TEST_CASE("dimension mismatches raise shape errors") {
  const FeatureBlock block = spawn_feature_block(3, 1, 8, 2, KernelSpec{1.0});
  Vector x(3);
  x << 1, 2, 3;
  CHECK_THROWS_AS(feature_vector(block, x), ShapeError);
  SparseVec sx;
  sx.idx = {5};
  sx.val = {1.0};
  CHECK_THROWS_AS(feature_vector(block, sx), ShapeError);
  Vector a(2), b(3);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(exact_rbf(a, b, KernelSpec{1.0}), ShapeError);
}

TEST_CASE("exact_rbf closed-form values") {
  Vector x0 = vec1(0.0), x1 = vec1(1.0);
  CHECK(exact_rbf(x1, x1, KernelSpec{2.5}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exact_rbf(x0, x1, KernelSpec{1.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  Vector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  CHECK(exact_rbf(a, b, KernelSpec{0.5}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("self-similarity of the approximate kernel") {
  const FeatureBlock block = spawn_feature_block(21, 1, 16384, 2, KernelSpec{1.0});
  Vector x(2);
  x << 0.3, -1.1;
  CHECK(approx_kernel(block, x, x) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(approx_kernel(block, x, x) <= 2.0);
}

TEST_CASE("kernel estimate concentrates around exp(-1)") {
  // sigma = 1, |x - x'| = 1: at m = 16384 the estimate should land within
  // 0.05 of exp(-1) in at least 99 of 100 blocks.
  const Vector x0 = vec1(0.0), x1 = vec1(1.0);
  const double exact = std::exp(-1.0);
  int hits = 0;
  for (int i = 0; i < 100; ++i) {
    const FeatureBlock block = spawn_feature_block(77, i, 16384, 1, KernelSpec{1.0});
    if (std::abs(approx_kernel(block, x0, x1) - exact) < 0.05) ++hits;
  }
  CHECK(hits >= 99);
}

TEST_CASE("block-averaged estimates converge at the Monte Carlo rate") {
  // Mean over N blocks of m features: |mean - exact| < 5 / sqrt(N*m).
  const int N = 10, m = 1000;
  RngStream rng(555);
  for (int pair = 0; pair < 5; ++pair) {
    const Vector a = random_point(rng, 3), b = random_point(rng, 3);
    const double exact = exact_rbf(a, b, KernelSpec{0.6});
    double mean = 0.0;
    for (int i = 0; i < N; ++i) {
      const FeatureBlock block =
          spawn_feature_block(900 + pair, i, m, 3, KernelSpec{0.6});
      mean += approx_kernel(block, a, b);
    }
    mean /= N;
    CHECK(std::abs(mean - exact) < 5.0 / std::sqrt(static_cast<double>(N) * m));
  }
}

TEST_CASE("per-feature products respect the phi = 2 bound") {
  RngStream rng(31);
  const FeatureBlock block = spawn_feature_block(13, 4, 64, 3, KernelSpec{1.5});
  for (int t = 0; t < 50; ++t) {
    const Vector a = random_point(rng, 3), b = random_point(rng, 3);
    // m * per-feature product of the normalized features = 2 cos * cos.
    const Vector fa = feature_vector(block, a), fb = feature_vector(block, b);
    const double m = static_cast<double>(block.m());
    CHECK((m * fa.cwiseProduct(fb)).cwiseAbs().maxCoeff() <= 2.0 + 1e-12);
    CHECK(std::abs(approx_kernel(block, a, b)) <= 2.0 + 1e-12);
  }
}

TEST_SUITE_END();
