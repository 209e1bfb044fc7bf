#ifndef TSG_TYPES_HPP
#define TSG_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tsg/errors.hpp"

namespace tsg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Sparse instance in LIBSVM style. Indices are 0-based internally and
// strictly increasing; the external text format is 1-based.
struct SparseVec {
  std::vector<std::int32_t> idx;
  std::vector<double> val;

  std::size_t nnz() const { return idx.size(); }

  // Highest referenced dimension count (max index + 1), 0 when empty.
  std::int32_t min_dim() const { return idx.empty() ? 0 : idx.back() + 1; }

  Vector to_dense(std::int32_t d) const {
    if (min_dim() > d)
      throw ShapeError("sparse vector index " + std::to_string(idx.back()) +
                       " exceeds dimension " + std::to_string(d));
    Vector out = Vector::Zero(d);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = val[k];
    return out;
  }

  bool operator==(const SparseVec& o) const {
    return idx == o.idx && val == o.val;
  }
};

inline double dot(const SparseVec& a, const SparseVec& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.idx.size() && j < b.idx.size()) {
    if (a.idx[i] == b.idx[j])
      s += a.val[i] * b.val[j], ++i, ++j;
    else if (a.idx[i] < b.idx[j])
      ++i;
    else
      ++j;
  }
  return s;
}

inline double squared_norm(const SparseVec& a) {
  double s = 0.0;
  for (double v : a.val) s += v * v;
  return s;
}

inline double squared_distance(const SparseVec& a, const SparseVec& b) {
  return squared_norm(a) - 2.0 * dot(a, b) + squared_norm(b);
}

}  // namespace tsg

#endif
