#ifndef TSG_TRAINER_HPP
#define TSG_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "tsg/data.hpp"
#include "tsg/loss.hpp"
#include "tsg/model.hpp"
#include "tsg/rf.hpp"

namespace tsg {

// gamma = 1/eta, independent of the iteration. eta >= 1 keeps gamma <= 1.
struct ConstantRate {
  double eta = 10.0;
};

// gamma = theta / T^{3/4} with 0 < theta <= T^{3/4}.
struct TheoremRate {
  double theta = 1.0;
};

using StepSchedule = std::variant<ConstantRate, TheoremRate>;

double step_size(const StepSchedule& schedule, std::int64_t iteration, std::int64_t total);

struct TrainConfig {
  double C = 1.0;
  double C_star = 0.0;
  double sigma = 1.0;
  StepSchedule schedule = ConstantRate{};
  std::int64_t T = 0;
  std::int32_t batch_labeled = 256;
  std::int32_t batch_unlabeled = 256;
  UnlabeledLoss loss;
  std::int32_t m = 1;
  std::int64_t base_seed = 1;  // feature randomness
  std::int64_t data_seed = 2;  // instance sampling, independent of base_seed
};

void validate(const TrainConfig& cfg);

// Experiment-protocol defaults.
inline double default_c_star(double C, std::size_t n_labeled, std::size_t n_unlabeled) {
  return n_unlabeled == 0 ? 0.0
                          : C * static_cast<double>(n_labeled) / static_cast<double>(n_unlabeled);
}
std::int32_t default_feature_count(std::size_t n_total);                  // ceil(sqrt(n))
std::int64_t one_pass_iterations(std::size_t n_unlabeled, std::int32_t batch_unlabeled,
                                 int passes = 1);

// Deterministic with-replacement batch draw for iteration i; stream 2i is
// the labeled pool, 2i+1 the unlabeled pool. Pure, so test oracles can
// replay the exact sampling sequence.
enum class Pool : std::uint64_t { Labeled = 0, Unlabeled = 1 };
std::vector<std::uint32_t> sample_batch(std::int64_t data_seed, std::int64_t iteration,
                                        Pool pool, std::int32_t count, std::size_t pool_size);

struct LabeledBatch {
  std::vector<const SparseVec*> x;
  std::vector<int> y;
};
struct UnlabeledBatch {
  std::vector<const SparseVec*> x;
};

// Per-point gradient weights from the composite loss; shared by the TSG
// trainer and the fixed-feature baseline so comparisons isolate feature
// freshness. labeled[p] = (C/B_l) l'(s_p, y_p), unlabeled[p] = (C*/B_u) u'(s_p).
struct LossWeights {
  std::vector<double> labeled;
  std::vector<double> unlabeled;
  double batch_loss = 0.0;  // C * mean hinge + C* * mean unlabeled value
};
LossWeights loss_weights(const std::vector<double>& labeled_scores, const std::vector<int>& y,
                         const std::vector<double>& unlabeled_scores, double C, double C_star,
                         const UnlabeledLoss& loss);

// In-progress coefficients with a lazy global rescale. Instead of the
// O(i*m) shrink of every prior alpha_j each iteration, a running product
// of (1 - gamma_k) is kept and each coefficient remembers the product at
// its creation; the effective value is raw * (P_now / P_creation). The
// store flushes to eager form whenever a factor would underflow the
// product.
class TrainState {
 public:
  TrainState(const TrainConfig& cfg, std::int32_t d);

  std::int64_t iteration() const { return iteration_; }
  std::int32_t dimension() const { return d_; }

  // f_t at arbitrary points under the coefficients accumulated so far.
  // Blocks are regenerated, never cached: one spawn per prior iteration
  // per call, evaluated block-major across the batch.
  std::vector<double> scores(const std::vector<const SparseVec*>& points) const;
  double score(const SparseVec& x) const;

  // Effective (eagerly rescaled) view of coefficient j, 0-based.
  Vector coefficient(std::int64_t j) const;
  double coeff_norm2() const { return norm2_; }

  // Appends alpha_i = raw and shrinks all prior coefficients by
  // (1 - gamma), lazily.
  void push(Vector raw, double gamma);

  Model finalize() const;

 private:
  void flush(double pending_factor);

  TrainConfig cfg_;
  std::int32_t d_;
  std::int64_t iteration_ = 0;
  std::vector<Vector> raw_;
  std::vector<double> creation_scale_;
  double scale_ = 1.0;   // product of (1 - gamma_k) since last flush
  double norm2_ = 0.0;   // sum over j of ||effective alpha_j||^2
};

struct StepStats {
  double gamma = 0.0;
  std::vector<double> labeled_scores;
  std::vector<double> unlabeled_scores;
  double batch_loss = 0.0;
  double coeff_norm2 = 0.0;
};

// One Algorithm-1 iteration: score the batch under f_t, assemble the
// triply stochastic gradient in block i's feature space, append
// alpha_i = -gamma_i * g_i and shrink prior coefficients by (1 - gamma_i).
StepStats tsg_step(TrainState& state, const LabeledBatch& labeled, const UnlabeledBatch& unlabeled,
                   const FeatureBlock& block, const TrainConfig& cfg);

// Per-iteration observer: indices/scores describe the sampled batch under
// f_t (before the update); coeff_norm2 reflects the state after it.
struct StepInfo {
  std::int64_t iteration = 0;  // 1-based
  double gamma = 0.0;
  const std::vector<std::uint32_t>& labeled_idx;
  const std::vector<std::uint32_t>& unlabeled_idx;
  const std::vector<double>& labeled_scores;
  const std::vector<double>& unlabeled_scores;
  double batch_loss = 0.0;
  double coeff_norm2 = 0.0;
};
using TrainObserver = std::function<void(const StepInfo&)>;

Model train(const TrainConfig& cfg, const SemiDataset& data,
            const TrainObserver& observer = {});

double error_rate(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace tsg

#endif
