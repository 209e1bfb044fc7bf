#include "tsg/rf.hpp"

#include <cmath>

#include "tsg/errors.hpp"
#include "tsg/rng.hpp"

namespace tsg {

FeatureBlock spawn_feature_block(std::uint64_t base_seed, std::uint64_t iteration_index,
                                 std::int64_t m, std::int64_t d, const KernelSpec& spec) {
  if (m < 1) throw ConfigError("feature block needs m >= 1, got " + std::to_string(m));
  if (d < 1) throw ConfigError("feature block needs d >= 1, got " + std::to_string(d));
  if (!(spec.sigma > 0.0))
    throw ConfigError("RBF sigma must be positive, got " + std::to_string(spec.sigma));

  FeatureBlock block;
  block.iteration_index = iteration_index;
  block.sigma = spec.sigma;
  block.directions.resize(m, d);
  block.phases.resize(m);

  RngStream stream(CounterRng::derive_key(base_seed, iteration_index));
  const double scale = std::sqrt(2.0 * spec.sigma);
  for (std::int64_t j = 0; j < m; ++j)
    for (std::int64_t k = 0; k < d; ++k)
      block.directions(j, k) = scale * stream.next_gaussian();
  for (std::int64_t j = 0; j < m; ++j)
    block.phases[j] = 2.0 * M_PI * stream.next_uniform01();
  return block;
}

namespace detail {

Vector block_projections(const FeatureBlock& block, const Vector& x) {
  if (x.size() != block.d())
    throw ShapeError("feature_vector: input has dimension " + std::to_string(x.size()) +
                     ", block expects " + std::to_string(block.d()));
  return block.directions * x + block.phases;
}

Vector block_projections(const FeatureBlock& block, const SparseVec& x) {
  if (x.min_dim() > block.d())
    throw ShapeError("feature_vector: sparse input index " + std::to_string(x.min_dim() - 1) +
                     " out of range for dimension " + std::to_string(block.d()));
  Vector z = block.phases;
  for (std::size_t k = 0; k < x.idx.size(); ++k)
    z += x.val[k] * block.directions.col(x.idx[k]);
  return z;
}

template <typename X>
Vector features_impl(const FeatureBlock& block, const X& x) {
  Vector z = block_projections(block, x);
  const double amp = std::sqrt(2.0 / static_cast<double>(block.m()));
  return (amp * z.array().cos()).matrix();
}

}  // namespace detail

Vector feature_vector(const FeatureBlock& block, const Vector& x) {
  return detail::features_impl(block, x);
}

Vector feature_vector(const FeatureBlock& block, const SparseVec& x) {
  return detail::features_impl(block, x);
}

double approx_kernel(const FeatureBlock& block, const Vector& x, const Vector& x2) {
  return feature_vector(block, x).dot(feature_vector(block, x2));
}

double approx_kernel(const FeatureBlock& block, const SparseVec& x, const SparseVec& x2) {
  return feature_vector(block, x).dot(feature_vector(block, x2));
}

double exact_rbf(const Vector& x, const Vector& x2, const KernelSpec& spec) {
  if (x.size() != x2.size())
    throw ShapeError("exact_rbf: dimension mismatch " + std::to_string(x.size()) + " vs " +
                     std::to_string(x2.size()));
  return std::exp(-spec.sigma * (x - x2).squaredNorm());
}

double exact_rbf(const SparseVec& x, const SparseVec& x2, const KernelSpec& spec) {
  return std::exp(-spec.sigma * squared_distance(x, x2));
}

}  // namespace tsg
