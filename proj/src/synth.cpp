#include "tsg/synth.hpp"

#include "tsg/errors.hpp"
#include "tsg/rng.hpp"

namespace tsg {

SyntheticData make_two_gaussians(std::size_t n, std::int32_t d, double shift,
                                 std::uint64_t seed) {
  if (d < 1) throw ConfigError("synthetic data needs d >= 1");
  SyntheticData out;
  out.d = d;
  out.x.reserve(n);
  out.y.reserve(n);
  RngStream stream(CounterRng::derive_key(seed, 0x5D17ull));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = (stream.next_word() & 1) ? 1 : -1;
    SparseVec v;
    v.idx.reserve(static_cast<std::size_t>(d));
    v.val.reserve(static_cast<std::size_t>(d));
    for (std::int32_t j = 0; j < d; ++j) {
      double value = stream.next_gaussian();
      if (j == 0) value += label * shift;
      if (value != 0.0) {
        v.idx.push_back(j);
        v.val.push_back(value);
      }
    }
    out.x.push_back(std::move(v));
    out.y.push_back(label);
  }
  return out;
}

}  // namespace tsg
