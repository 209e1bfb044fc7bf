#ifndef TSG_MODEL_HPP
#define TSG_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsg/loss.hpp"
#include "tsg/rf.hpp"
#include "tsg/types.hpp"

namespace tsg {

// Trained function f(.) = sum_i <alpha_i, phi_i(.)>. Feature blocks are not
// stored; they are replayed from (base_seed, iteration index) at prediction
// time. Block i for coefficient i uses iteration_index i+1 -- index 0 is
// reserved for the fixed-feature baseline.
struct Model {
  std::int64_t base_seed = 0;
  std::int32_t m = 0;
  std::int32_t d = 0;
  double sigma = 1.0;
  UnlabeledLoss loss;  // metadata only
  std::vector<Vector> coefficients;

  std::int64_t iterations() const { return static_cast<std::int64_t>(coefficients.size()); }
  KernelSpec kernel() const { return KernelSpec{sigma}; }
};

// Throws if coefficient shapes or values violate the Model invariants.
void validate(const Model& model);

// Accumulates f(x) from 0 over replayed blocks, exactly one block
// regeneration per training iteration (O(mT) per point).
double predict_score(const Model& model, const SparseVec& x);
double predict_score(const Model& model, const Vector& x);

// sign(score) with sign(0) = +1.
inline int label_of(double score) { return score >= 0.0 ? 1 : -1; }
int predict_label(const Model& model, const SparseVec& x);

// Binary container, little-endian. Magic "TSG1", format version, header
// (d, m, T, sigma, base_seed, loss tag), then T*m coefficient doubles in
// iteration-major order.
void save(const Model& model, std::ostream& out);
void save(const Model& model, const std::string& path);
Model load(std::istream& in);
Model load_model(const std::string& path);

// Repeated prediction over many inputs. With caching on, each block is
// spawned once and reused; results are identical to replaying blocks per
// call (seed-replay equivalence is tested).
class Predictor {
 public:
  explicit Predictor(const Model& model, bool cache_blocks = true);

  double score(const SparseVec& x) const;
  std::vector<double> scores(const std::vector<SparseVec>& xs) const;

 private:
  const FeatureBlock& block(std::int64_t i) const;  // i = 0..T-1

  const Model& model_;
  bool cache_;
  mutable std::unordered_map<std::int64_t, FeatureBlock> cache_store_;
  mutable FeatureBlock scratch_;
};

}  // namespace tsg

#endif
