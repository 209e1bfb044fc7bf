#ifndef TSG_BASELINE_HPP
#define TSG_BASELINE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "tsg/trainer.hpp"

namespace tsg {

// Standard SGD over one fixed block of random features -- the ablation
// that differs from the TSG trainer only in feature freshness. The block
// is regenerable from (base_seed, index 0), never stored.
struct LinearRFModel {
  std::int64_t base_seed = 0;
  std::int32_t m_total = 0;
  std::int32_t d = 0;
  double sigma = 1.0;
  UnlabeledLoss loss;
  Vector w;

  FeatureBlock block() const {
    return spawn_feature_block(static_cast<std::uint64_t>(base_seed), 0, m_total, d,
                               KernelSpec{sigma});
  }
};

struct BaselineConfig {
  double C = 1.0;
  double C_star = 0.0;
  double sigma = 1.0;
  StepSchedule schedule = ConstantRate{};
  int passes = 10;
  std::int32_t batch_labeled = 256;
  std::int32_t batch_unlabeled = 256;
  UnlabeledLoss loss;
  std::int32_t m_total = 1;
  std::int64_t base_seed = 1;
  std::int64_t data_seed = 2;
};

// w <- (1 - gamma) w - gamma (C mean_l l' phi(x_l) + C* mean_u u' phi(x_u)),
// using the same loss weights and batch sampler as the TSG trainer.
LinearRFModel train_frs3vm(const BaselineConfig& cfg, const SemiDataset& data);

double predict_linear(const LinearRFModel& model, const SparseVec& x);
std::vector<double> predict_linear(const LinearRFModel& model, const std::vector<SparseVec>& xs);

// Binary container with magic "FRS1"; layout mirrors the TSG model file.
void save(const LinearRFModel& model, std::ostream& out);
void save_frs(const LinearRFModel& model, const std::string& path);
LinearRFModel load_frs(std::istream& in);
LinearRFModel load_frs(const std::string& path);

}  // namespace tsg

#endif
