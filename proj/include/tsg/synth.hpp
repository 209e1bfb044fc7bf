#ifndef TSG_SYNTH_HPP
#define TSG_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "tsg/types.hpp"

namespace tsg {

// Two spherical Gaussians with unit covariance and means +-(shift, 0, ...).
// Labels are drawn fair-coin first, then the point around the class mean,
// so the classes are balanced in expectation and the draw is fully
// determined by the seed.
struct SyntheticData {
  std::vector<SparseVec> x;
  std::vector<int> y;
  std::int32_t d = 0;
};

SyntheticData make_two_gaussians(std::size_t n, std::int32_t d, double shift,
                                 std::uint64_t seed);

}  // namespace tsg

#endif
