#ifndef TSG_DATA_HPP
#define TSG_DATA_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsg/types.hpp"

namespace tsg {

// Semi-supervised training view: labeled pairs plus an unlabeled pool.
// Ground-truth labels for the unlabeled pool deliberately live elsewhere
// (SemiSplit) so nothing reachable from the trainer can see them.
struct SemiDataset {
  std::vector<SparseVec> labeled_x;
  std::vector<int> labeled_y;  // strictly {-1, +1}
  std::vector<SparseVec> unlabeled_x;
  std::int32_t d = 0;

  std::size_t n_labeled() const { return labeled_x.size(); }
  std::size_t n_unlabeled() const { return unlabeled_x.size(); }
  std::size_t n_total() const { return n_labeled() + n_unlabeled(); }
};

// A split with evaluation-only metadata alongside the trainer-visible view.
struct SemiSplit {
  SemiDataset data;
  std::vector<int> hidden_labels;        // aligned with data.unlabeled_x
  std::vector<std::size_t> labeled_idx;  // positions in the source corpus
  std::vector<std::size_t> unlabeled_idx;
  std::uint64_t seed = 0;
};

struct ParsedData {
  std::vector<SparseVec> x;
  std::vector<double> raw_labels;
  std::int32_t d = 0;  // max feature index observed
};

// LIBSVM text: "<label> <idx>:<val> ...", 1-based strictly increasing
// indices. Malformed lines raise ParseError carrying the line number.
ParsedData parse_libsvm(std::istream& in);
ParsedData parse_libsvm_file(const std::string& path);

void write_libsvm(std::ostream& out, const std::vector<SparseVec>& x,
                  const std::vector<double>& labels);

// Binary label alphabets {-1,+1}, {0,1} and {1,2} map onto {-1,+1} by
// order; anything else is rejected.
std::vector<int> map_labels(const std::vector<double>& raw);

// Uniform without-replacement draw of n_labeled instances that keep their
// labels; the rest become the unlabeled pool with ground truth retained
// separately. Resamples a bounded number of times if one class is missing.
SemiSplit make_semi_split(const std::vector<SparseVec>& x, const std::vector<int>& y,
                          std::size_t n_labeled, std::uint64_t seed);

struct Fold {
  SemiDataset train;              // all labeled data plus one unlabeled subset
  std::vector<SparseVec> test_x;  // remaining subsets
  std::vector<int> test_y;        // their hidden labels
};

// Unlabeled pool partitioned evenly (sizes differ by at most one); fold j
// trains on labeled + subset j and tests on the other k-1 subsets.
std::vector<Fold> kfold_unlabeled(const SemiSplit& split, std::size_t k, std::uint64_t seed);

// Per-dimension min-max scaling to [0,1] fit on training data. Implicit
// zeros of sparse vectors count as observed values, so dimensions that are
// nonnegative and sparse keep 0 fixed. Degenerate dimensions map to 0.
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;
  std::int32_t d() const { return static_cast<std::int32_t>(min.size()); }
};

ScalerParams scale_fit(const std::vector<SparseVec>& x, std::int32_t d);
SparseVec scale_apply(const ScalerParams& params, const SparseVec& x);
std::vector<SparseVec> scale_apply(const ScalerParams& params, const std::vector<SparseVec>& x);

void apply_scaling(const ScalerParams& params, SemiDataset& data);

}  // namespace tsg

#endif
