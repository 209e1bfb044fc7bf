#include "tsg/trainer.hpp"

#include <cmath>

#include "tsg/errors.hpp"
#include "tsg/rng.hpp"

namespace tsg {

namespace {

// Flush thresholds for the lazy rescale product.
constexpr double kMinStepFactor = 1e-3;
constexpr double kMinScale = 1e-100;

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

double step_size(const StepSchedule& schedule, std::int64_t iteration, std::int64_t total) {
  (void)iteration;  // both published schedules are iteration-independent
  double gamma;
  if (const auto* c = std::get_if<ConstantRate>(&schedule)) {
    if (!(c->eta >= 1.0))
      throw ConfigError("constant schedule needs eta >= 1 so that gamma <= 1, got eta = " +
                        std::to_string(c->eta));
    gamma = 1.0 / c->eta;
  } else {
    const auto& r = std::get<TheoremRate>(schedule);
    if (total < 1) throw ConfigError("theorem-rate schedule needs T >= 1");
    const double limit = std::pow(static_cast<double>(total), 0.75);
    if (!(r.theta > 0.0) || r.theta > limit)
      throw ConfigError("theorem-rate schedule needs 0 < theta <= T^(3/4) = " +
                        std::to_string(limit) + ", got theta = " + std::to_string(r.theta));
    gamma = r.theta / limit;
  }
  if (!(gamma > 0.0) || gamma > 1.0)
    throw ConfigError("step size " + std::to_string(gamma) + " outside (0, 1]");
  return gamma;
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.C > 0.0)) throw ConfigError("C must be positive");
  if (cfg.C_star < 0.0) throw ConfigError("C* must be nonnegative");
  if (!(cfg.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (cfg.T < 0) throw ConfigError("T must be nonnegative");
  if (cfg.batch_labeled < 1) throw ConfigError("labeled batch size must be >= 1");
  if (cfg.batch_unlabeled < 1) throw ConfigError("unlabeled batch size must be >= 1");
  if (cfg.m < 1) throw ConfigError("m must be >= 1");
  validate(cfg.loss);
  if (cfg.T > 0) step_size(cfg.schedule, 1, cfg.T);  // rejects bad schedules up front
}

std::int32_t default_feature_count(std::size_t n_total) {
  return std::max<std::int32_t>(
      1, static_cast<std::int32_t>(std::ceil(std::sqrt(static_cast<double>(n_total)))));
}

std::int64_t one_pass_iterations(std::size_t n_unlabeled, std::int32_t batch_unlabeled,
                                 int passes) {
  if (batch_unlabeled < 1) throw ConfigError("batch size must be >= 1");
  const auto touches = static_cast<std::int64_t>(n_unlabeled) * passes;
  return (touches + batch_unlabeled - 1) / batch_unlabeled;
}

std::vector<std::uint32_t> sample_batch(std::int64_t data_seed, std::int64_t iteration,
                                        Pool pool, std::int32_t count, std::size_t pool_size) {
  if (pool_size == 0) throw ConfigError("cannot sample from an empty pool");
  const std::uint64_t stream =
      (static_cast<std::uint64_t>(iteration) << 1) | static_cast<std::uint64_t>(pool);
  RngStream rng(CounterRng::derive_key(static_cast<std::uint64_t>(data_seed), stream));
  std::vector<std::uint32_t> out(static_cast<std::size_t>(count));
  for (auto& i : out) i = rng.next_index(static_cast<std::uint32_t>(pool_size));
  return out;
}

LossWeights loss_weights(const std::vector<double>& labeled_scores, const std::vector<int>& y,
                         const std::vector<double>& unlabeled_scores, double C, double C_star,
                         const UnlabeledLoss& loss) {
  LossWeights w;
  w.labeled.resize(labeled_scores.size());
  w.unlabeled.resize(unlabeled_scores.size());
  double sum_l = 0.0, sum_u = 0.0;
  for (std::size_t p = 0; p < labeled_scores.size(); ++p) {
    const LossValue lv = hinge(labeled_scores[p], y[p]);
    sum_l += lv.value;
    w.labeled[p] = C * lv.derivative / static_cast<double>(labeled_scores.size());
  }
  for (std::size_t p = 0; p < unlabeled_scores.size(); ++p) {
    const LossValue uv = unlabeled(loss, unlabeled_scores[p]);
    sum_u += uv.value;
    w.unlabeled[p] = C_star * uv.derivative / static_cast<double>(unlabeled_scores.size());
  }
  w.batch_loss = (labeled_scores.empty() ? 0.0 : C * sum_l / labeled_scores.size()) +
                 (unlabeled_scores.empty() ? 0.0 : C_star * sum_u / unlabeled_scores.size());
  return w;
}

TrainState::TrainState(const TrainConfig& cfg, std::int32_t d)
    : cfg_(cfg), d_(std::max<std::int32_t>(1, d)) {
  validate(cfg_);
}

std::vector<double> TrainState::scores(const std::vector<const SparseVec*>& points) const {
  std::vector<double> s(points.size(), 0.0);
  const KernelSpec spec{cfg_.sigma};
  for (std::size_t j = 0; j < raw_.size(); ++j) {
    const FeatureBlock block =
        spawn_feature_block(static_cast<std::uint64_t>(cfg_.base_seed),
                            static_cast<std::uint64_t>(j) + 1, cfg_.m, d_, spec);
    const double factor = scale_ / creation_scale_[j];
    for (std::size_t p = 0; p < points.size(); ++p)
      s[p] += factor * raw_[j].dot(feature_vector(block, *points[p]));
  }
  return s;
}

double TrainState::score(const SparseVec& x) const {
  return scores(std::vector<const SparseVec*>{&x})[0];
}

Vector TrainState::coefficient(std::int64_t j) const {
  const auto idx = static_cast<std::size_t>(j);
  return raw_[idx] * (scale_ / creation_scale_[idx]);
}

void TrainState::flush(double pending_factor) {
  for (std::size_t j = 0; j < raw_.size(); ++j) {
    raw_[j] *= (scale_ / creation_scale_[j]) * pending_factor;
    creation_scale_[j] = 1.0;
  }
  scale_ = 1.0;
}

void TrainState::push(Vector raw, double gamma) {
  const double factor = 1.0 - gamma;
  norm2_ = factor * factor * norm2_ + raw.squaredNorm();
  if (factor < kMinStepFactor || scale_ * factor < kMinScale) {
    flush(factor);
  } else {
    scale_ *= factor;
  }
  raw_.push_back(std::move(raw));
  creation_scale_.push_back(scale_);
  ++iteration_;
}

Model TrainState::finalize() const {
  Model model;
  model.base_seed = cfg_.base_seed;
  model.m = cfg_.m;
  model.d = d_;
  model.sigma = cfg_.sigma;
  model.loss = cfg_.loss;
  model.coefficients.reserve(raw_.size());
  for (std::size_t j = 0; j < raw_.size(); ++j)
    model.coefficients.push_back(raw_[j] * (scale_ / creation_scale_[j]));
  validate(model);
  return model;
}

StepStats tsg_step(TrainState& state, const LabeledBatch& labeled, const UnlabeledBatch& unlabeled,
                   const FeatureBlock& block, const TrainConfig& cfg) {
  const std::int64_t i = state.iteration() + 1;
  if (labeled.x.empty() || unlabeled.x.empty())
    throw ConfigError("tsg_step requires nonempty labeled and unlabeled batches");
  if (labeled.x.size() != labeled.y.size())
    throw ShapeError("labeled batch points and labels disagree in length");
  if (block.iteration_index != static_cast<std::uint64_t>(i))
    throw ConfigError("feature block index " + std::to_string(block.iteration_index) +
                      " does not match iteration " + std::to_string(i));
  if (block.m() != cfg.m || block.d() != state.dimension())
    throw ShapeError("feature block shape does not match the training configuration");

  StepStats stats;
  stats.gamma = step_size(cfg.schedule, i, cfg.T);

  std::vector<const SparseVec*> all;
  all.reserve(labeled.x.size() + unlabeled.x.size());
  all.insert(all.end(), labeled.x.begin(), labeled.x.end());
  all.insert(all.end(), unlabeled.x.begin(), unlabeled.x.end());
  std::vector<double> s = state.scores(all);
  stats.labeled_scores.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(labeled.x.size()));
  stats.unlabeled_scores.assign(s.begin() + static_cast<std::ptrdiff_t>(labeled.x.size()), s.end());
  if (!all_finite(s)) throw DivergenceError("non-finite score in batch", i);

  const LossWeights w =
      loss_weights(stats.labeled_scores, labeled.y, stats.unlabeled_scores, cfg.C, cfg.C_star,
                   cfg.loss);
  stats.batch_loss = w.batch_loss;

  Vector g = Vector::Zero(cfg.m);
  for (std::size_t p = 0; p < labeled.x.size(); ++p)
    if (w.labeled[p] != 0.0) g += w.labeled[p] * feature_vector(block, *labeled.x[p]);
  for (std::size_t p = 0; p < unlabeled.x.size(); ++p)
    if (w.unlabeled[p] != 0.0) g += w.unlabeled[p] * feature_vector(block, *unlabeled.x[p]);

  Vector alpha = -stats.gamma * g;
  if (!alpha.allFinite()) throw DivergenceError("non-finite gradient", i);
  state.push(std::move(alpha), stats.gamma);
  stats.coeff_norm2 = state.coeff_norm2();
  return stats;
}

Model train(const TrainConfig& cfg, const SemiDataset& data, const TrainObserver& observer) {
  validate(cfg);
  if (cfg.T > 0) {
    if (data.n_labeled() == 0) throw ConfigError("training needs at least one labeled instance");
    if (data.n_unlabeled() == 0)
      throw ConfigError("training needs at least one unlabeled instance");
  }

  TrainState state(cfg, data.d);
  const KernelSpec spec{cfg.sigma};
  for (std::int64_t i = 1; i <= cfg.T; ++i) {
    const auto li = sample_batch(cfg.data_seed, i, Pool::Labeled, cfg.batch_labeled,
                                 data.n_labeled());
    const auto ui = sample_batch(cfg.data_seed, i, Pool::Unlabeled, cfg.batch_unlabeled,
                                 data.n_unlabeled());
    LabeledBatch lb;
    lb.x.reserve(li.size());
    lb.y.reserve(li.size());
    for (auto idx : li) {
      lb.x.push_back(&data.labeled_x[idx]);
      lb.y.push_back(data.labeled_y[idx]);
    }
    UnlabeledBatch ub;
    ub.x.reserve(ui.size());
    for (auto idx : ui) ub.x.push_back(&data.unlabeled_x[idx]);

    const FeatureBlock block = spawn_feature_block(static_cast<std::uint64_t>(cfg.base_seed),
                                                   static_cast<std::uint64_t>(i), cfg.m,
                                                   state.dimension(), spec);
    const StepStats stats = tsg_step(state, lb, ub, block, cfg);
    if (observer) {
      observer(StepInfo{i, stats.gamma, li, ui, stats.labeled_scores, stats.unlabeled_scores,
                        stats.batch_loss, stats.coeff_norm2});
    }
  }
  return state.finalize();
}

double error_rate(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw ShapeError("scores and labels disagree in length");
  if (scores.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (label_of(scores[i]) != labels[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

}  // namespace tsg
