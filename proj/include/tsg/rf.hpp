#ifndef TSG_RF_HPP
#define TSG_RF_HPP

#include <cstdint>

#include "tsg/types.hpp"

namespace tsg {

// Gaussian RBF kernel k(x, x') = exp(-sigma * ||x - x'||^2).
struct KernelSpec {
  double sigma = 1.0;
};

// One iteration's worth of random Fourier features: m directions (rows) and
// m phases, fully determined by (base_seed, iteration_index, m, d, sigma).
struct FeatureBlock {
  std::uint64_t iteration_index = 0;
  Matrix directions;  // m x d, row j is omega_j
  Vector phases;      // length m, each in [0, 2*pi)
  double sigma = 1.0;

  std::int64_t m() const { return directions.rows(); }
  std::int64_t d() const { return directions.cols(); }
};

// Draws block i. Directions are coordinate-wise N(0, 2*sigma) -- the
// spectral measure of the RBF kernel above -- and phases are uniform on
// [0, 2*pi). Pure in its arguments: spawning twice gives identical blocks.
FeatureBlock spawn_feature_block(std::uint64_t base_seed, std::uint64_t iteration_index,
                                 std::int64_t m, std::int64_t d, const KernelSpec& spec);

// phi(x): entry j = sqrt(2/m) * cos(omega_j . x + b_j). The 1/sqrt(m)
// normalization is folded in so kernel estimates are plain inner products.
Vector feature_vector(const FeatureBlock& block, const Vector& x);
Vector feature_vector(const FeatureBlock& block, const SparseVec& x);

// <phi(x), phi(x')> for this block; lies in [-2, 2].
double approx_kernel(const FeatureBlock& block, const Vector& x, const Vector& x2);
double approx_kernel(const FeatureBlock& block, const SparseVec& x, const SparseVec& x2);

double exact_rbf(const Vector& x, const Vector& x2, const KernelSpec& spec);
double exact_rbf(const SparseVec& x, const SparseVec& x2, const KernelSpec& spec);

namespace detail {
// omega . x + b for every feature row, shared by the dense/sparse paths.
Vector block_projections(const FeatureBlock& block, const Vector& x);
Vector block_projections(const FeatureBlock& block, const SparseVec& x);
}  // namespace detail

}  // namespace tsg

#endif
