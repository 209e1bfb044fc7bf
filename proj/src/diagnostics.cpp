#include "tsg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tsg/errors.hpp"

namespace tsg {

namespace {

double rbf(const KernelSpec& spec, const Vector& a, const Vector& b) {
  return std::exp(-spec.sigma * (a - b).squaredNorm());
}

// Relative slack on the Lemma-3 inequality to absorb float drift in the
// incrementally maintained norm.
double norm_slack(double bound) { return 1e-9 * (1.0 + bound); }

}  // namespace

TheoryConstants theory_constants(const TrainConfig& cfg) {
  const LossBounds lb = loss_bounds(cfg.loss);
  TheoryConstants c;
  c.kappa = 1.0;
  c.phi = 2.0;
  c.M = cfg.C * lb.M_l + cfg.C_star * lb.M_u;
  c.M_prime = cfg.C * lb.L_prime + cfg.C_star * lb.U_prime;
  c.T = cfg.T;
  if (const auto* r = std::get_if<TheoremRate>(&cfg.schedule)) {
    c.theorem_rate = true;
    c.theta = r->theta;
    const double root = std::sqrt(c.kappa) + std::sqrt(c.phi);
    c.D = c.theta * c.theta * c.M * c.M * root * root;
  }
  return c;
}

KernelTwin::KernelTwin(KernelSpec spec, std::size_t support_cap)
    : spec_(spec), cap_(support_cap) {}

void KernelTwin::track(std::vector<Vector> points) {
  for (auto& p : points) {
    double s = evaluate(p);
    tracked_points_.push_back(std::move(p));
    tracked_scores_.push_back(s);
  }
}

double KernelTwin::evaluate(const Vector& x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < points_.size(); ++j) s += weights_[j] * rbf(spec_, points_[j], x);
  return s;
}

void KernelTwin::append(const Vector& x, double weight) {
  if (points_.size() >= cap_)
    throw ResourceError("kernel twin support exceeded " + std::to_string(cap_) +
                        " points; diagnostics are desk-scale only");
  // Contribution of the new section to every maintained score.
  for (std::size_t j = 0; j < points_.size(); ++j)
    support_scores_[j] += weight * rbf(spec_, points_[j], x);
  for (std::size_t i = 0; i < tracked_points_.size(); ++i)
    tracked_scores_[i] += weight * rbf(spec_, tracked_points_[i], x);
  points_.push_back(x);
  weights_.push_back(weight);
  support_scores_.push_back(0.0);  // filled by caller once all appends land
}

void KernelTwin::step(const Batch& batch, double gamma, const UnlabeledLoss& loss, double C,
                      double C_star) {
  if (batch.labeled_x.size() != batch.f_labeled_scores.size() ||
      batch.labeled_x.size() != batch.labeled_y.size() ||
      batch.unlabeled_x.size() != batch.f_unlabeled_scores.size())
    throw ShapeError("twin step batch fields disagree in length");

  const double factor = 1.0 - gamma;
  for (auto& w : weights_) w *= factor;
  for (auto& s : support_scores_) s *= factor;
  for (auto& s : tracked_scores_) s *= factor;

  const std::size_t old_support = points_.size();
  const double bl = static_cast<double>(batch.labeled_x.size());
  const double bu = static_cast<double>(batch.unlabeled_x.size());
  // Derivatives at the trainer's f_t scores (the twin's own scores would
  // be the wrong coupling).
  for (std::size_t p = 0; p < batch.labeled_x.size(); ++p) {
    const double w = -gamma * C * hinge(batch.f_labeled_scores[p], batch.labeled_y[p]).derivative / bl;
    if (w != 0.0) append(*batch.labeled_x[p], w);
  }
  for (std::size_t p = 0; p < batch.unlabeled_x.size(); ++p) {
    const double w = -gamma * C_star * unlabeled(loss, batch.f_unlabeled_scores[p]).derivative / bu;
    if (w != 0.0) append(*batch.unlabeled_x[p], w);
  }
  // Scores of the freshly appended points under the full post-step h.
  for (std::size_t j = old_support; j < points_.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < points_.size(); ++k)
      s += weights_[k] * rbf(spec_, points_[k], points_[j]);
    support_scores_[j] = s;
  }
}

double KernelTwin::norm2() const {
  double s = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) s += weights_[j] * support_scores_[j];
  return std::max(0.0, s);
}

double KernelTwin::norm() const { return std::sqrt(norm2()); }

double KernelTwin::norm2_quadform() const {
  const auto n = static_cast<Eigen::Index>(points_.size());
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      K(i, j) = K(j, i) = rbf(spec_, points_[static_cast<std::size_t>(i)],
                              points_[static_cast<std::size_t>(j)]);
  Eigen::Map<const Vector> beta(weights_.data(), n);
  return beta.dot(K * beta);
}

double KernelTwin::norm2_pairwise() const {
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = 0; j < points_.size(); ++j)
      s += weights_[i] * weights_[j] * rbf(spec_, points_[i], points_[j]);
  return s;
}

double gap_estimate(const Model& model, const KernelTwin& twin,
                    const std::vector<Vector>& probes) {
  if (probes.empty()) throw ConfigError("gap estimate needs at least one probe point");
  std::vector<double> f(probes.size(), 0.0);
  const KernelSpec spec = model.kernel();
  for (std::int64_t i = 0; i < model.iterations(); ++i) {
    const FeatureBlock block =
        spawn_feature_block(static_cast<std::uint64_t>(model.base_seed),
                            static_cast<std::uint64_t>(i) + 1, model.m, model.d, spec);
    const Vector& a = model.coefficients[static_cast<std::size_t>(i)];
    for (std::size_t p = 0; p < probes.size(); ++p)
      f[p] += a.dot(feature_vector(block, probes[p]));
  }
  double acc = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double gap = f[p] - twin.evaluate(probes[p]);
    acc += gap * gap;
  }
  return acc / static_cast<double>(probes.size());
}

double rkhs_grad_norm(const KernelTwin& twin, const std::vector<Vector>& labeled_x,
                      const std::vector<int>& labeled_y, const std::vector<Vector>& unlabeled_x,
                      double C, double C_star, const UnlabeledLoss& loss,
                      std::size_t point_cap) {
  if (labeled_x.size() != labeled_y.size())
    throw ShapeError("labeled points and labels disagree in length");
  const std::size_t total = twin.support_size() + labeled_x.size() + unlabeled_x.size();
  if (total > point_cap)
    throw ResourceError("gradient-norm expansion needs " + std::to_string(total) +
                        " points, cap is " + std::to_string(point_cap) +
                        "; subsample the pools for diagnostics");

  // Expansion points: support first, then labeled, then unlabeled.
  std::vector<const Vector*> pts;
  std::vector<double> w;
  pts.reserve(total);
  w.reserve(total);
  for (std::size_t j = 0; j < twin.support_size(); ++j) {
    pts.push_back(&twin.support_points()[j]);
    w.push_back(twin.support_weights()[j]);
  }
  const double nl = static_cast<double>(labeled_x.size());
  for (std::size_t i = 0; i < labeled_x.size(); ++i) {
    pts.push_back(&labeled_x[i]);
    w.push_back(C / nl * hinge(twin.evaluate(labeled_x[i]), labeled_y[i]).derivative);
  }
  const double nu = static_cast<double>(unlabeled_x.size());
  for (std::size_t i = 0; i < unlabeled_x.size(); ++i) {
    pts.push_back(&unlabeled_x[i]);
    w.push_back(C_star / nu * unlabeled(loss, twin.evaluate(unlabeled_x[i])).derivative);
  }

  // w^T K w accumulated row-blockwise; the Gram matrix is never stored.
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (w[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (w[j] != 0.0) row += w[j] * rbf(twin.spec(), *pts[i], *pts[j]);
    acc += w[i] * row;
  }
  return std::max(0.0, acc);
}

double objective_value(const KernelTwin& twin, const std::vector<Vector>& labeled_x,
                       const std::vector<int>& labeled_y, const std::vector<Vector>& unlabeled_x,
                       double C, double C_star, const UnlabeledLoss& loss) {
  double r = 0.5 * twin.norm2();
  if (!labeled_x.empty()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < labeled_x.size(); ++i)
      sum += hinge(twin.evaluate(labeled_x[i]), labeled_y[i]).value;
    r += C * sum / static_cast<double>(labeled_x.size());
  }
  if (!unlabeled_x.empty()) {
    double sum = 0.0;
    for (const auto& x : unlabeled_x) sum += unlabeled(loss, twin.evaluate(x)).value;
    r += C_star * sum / static_cast<double>(unlabeled_x.size());
  }
  return r;
}

double objective_value(const Model& model, const SemiDataset& data, double C, double C_star,
                       const UnlabeledLoss& loss) {
  // Feature-space norm surrogate; exact only in expectation over blocks.
  double norm2 = 0.0;
  for (const auto& a : model.coefficients) norm2 += a.squaredNorm();
  double r = 0.5 * norm2;
  Predictor predictor(model);
  if (!data.labeled_x.empty()) {
    const auto s = predictor.scores(data.labeled_x);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sum += hinge(s[i], data.labeled_y[i]).value;
    r += C * sum / static_cast<double>(s.size());
  }
  if (!data.unlabeled_x.empty()) {
    const auto s = predictor.scores(data.unlabeled_x);
    double sum = 0.0;
    for (double v : s) sum += unlabeled(loss, v).value;
    r += C_star * sum / static_cast<double>(s.size());
  }
  return r;
}

DiagnosticsEngine::DiagnosticsEngine(const TrainConfig& cfg, const SemiDataset& data,
                                     std::optional<double> lipschitz_L)
    : cfg_(cfg),
      constants_(theory_constants(cfg)),
      lipschitz_L_(lipschitz_L),
      twin_(KernelSpec{cfg.sigma}) {
  const std::size_t n = data.n_total();
  if (n > kMaxPoolPoints)
    throw ResourceError("diagnostics needs a dense Gram over " + std::to_string(n) +
                        " points, cap is " + std::to_string(kMaxPoolPoints) +
                        "; subsample the pools");
  if (data.n_labeled() == 0 || data.n_unlabeled() == 0)
    throw ConfigError("diagnostics needs nonempty labeled and unlabeled pools");

  n_labeled_ = data.n_labeled();
  n_unlabeled_ = data.n_unlabeled();
  labeled_y_ = data.labeled_y;
  lemma3_bound_ = std::sqrt(constants_.kappa) * constants_.M;

  const std::int32_t d = std::max<std::int32_t>(1, data.d);
  std::vector<Vector> dense;
  dense.reserve(n);
  for (const auto& x : data.labeled_x) dense.push_back(x.to_dense(d));
  for (const auto& x : data.unlabeled_x) dense.push_back(x.to_dense(d));

  const auto ni = static_cast<Eigen::Index>(n);
  data_gram_.resize(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      data_gram_(i, j) = data_gram_(j, i) =
          rbf(twin_.spec(), dense[static_cast<std::size_t>(i)],
              dense[static_cast<std::size_t>(j)]);

  twin_.track(std::move(dense));
}

TrainObserver DiagnosticsEngine::observer() {
  return [this](const StepInfo& info) { on_step(info); };
}

double DiagnosticsEngine::grad_norm2_now() const {
  // grad R(h) = h + sum_i c_i k(x_i, .) with the c's read off the tracked
  // h-scores; ||grad R||^2 = ||h||^2 + 2 c.s + c^T K c.
  const auto& s = twin_.tracked_scores();
  const auto n = static_cast<Eigen::Index>(s.size());
  Vector c(n);
  for (std::size_t i = 0; i < n_labeled_; ++i)
    c[static_cast<Eigen::Index>(i)] =
        cfg_.C / static_cast<double>(n_labeled_) * hinge(s[i], labeled_y_[i]).derivative;
  for (std::size_t i = 0; i < n_unlabeled_; ++i)
    c[static_cast<Eigen::Index>(n_labeled_ + i)] =
        cfg_.C_star / static_cast<double>(n_unlabeled_) *
        unlabeled(cfg_.loss, s[n_labeled_ + i]).derivative;
  Eigen::Map<const Vector> sv(s.data(), n);
  const double cross = c.dot(sv);
  const double quad = c.dot(data_gram_.selfadjointView<Eigen::Lower>() * c);
  return std::max(0.0, twin_.norm2() + 2.0 * cross + quad);
}

double DiagnosticsEngine::objective_now() const {
  const auto& s = twin_.tracked_scores();
  double sum_l = 0.0;
  for (std::size_t i = 0; i < n_labeled_; ++i) sum_l += hinge(s[i], labeled_y_[i]).value;
  double sum_u = 0.0;
  for (std::size_t i = 0; i < n_unlabeled_; ++i)
    sum_u += unlabeled(cfg_.loss, s[n_labeled_ + i]).value;
  return 0.5 * twin_.norm2() + cfg_.C * sum_l / static_cast<double>(n_labeled_) +
         cfg_.C_star * sum_u / static_cast<double>(n_unlabeled_);
}

void DiagnosticsEngine::on_step(const StepInfo& info) {
  // Row t describes the iterate h_t entering this step (h_1 = 0), so the
  // series aligns with the theorem statements that average over t = 1..T.
  DiagRow row;
  row.iteration = info.iteration;
  row.gamma = info.gamma;
  const auto& s = twin_.tracked_scores();
  double acc = 0.0;
  for (std::size_t p = 0; p < info.labeled_idx.size(); ++p) {
    const double gap = info.labeled_scores[p] - s[info.labeled_idx[p]];
    acc += gap * gap;
  }
  for (std::size_t p = 0; p < info.unlabeled_idx.size(); ++p) {
    const double gap = info.unlabeled_scores[p] - s[n_labeled_ + info.unlabeled_idx[p]];
    acc += gap * gap;
  }
  row.gap2 = acc / static_cast<double>(info.labeled_idx.size() + info.unlabeled_idx.size());
  row.h_norm = twin_.norm();
  row.grad_norm2 = grad_norm2_now();
  row.objective = objective_now();
  rows_.push_back(row);

  KernelTwin::Batch batch;
  batch.labeled_x.reserve(info.labeled_idx.size());
  batch.labeled_y.reserve(info.labeled_idx.size());
  for (auto idx : info.labeled_idx) {
    batch.labeled_x.push_back(&twin_.tracked_point(idx));
    batch.labeled_y.push_back(labeled_y_[idx]);
  }
  batch.f_labeled_scores = info.labeled_scores;
  batch.unlabeled_x.reserve(info.unlabeled_idx.size());
  for (auto idx : info.unlabeled_idx)
    batch.unlabeled_x.push_back(&twin_.tracked_point(n_labeled_ + idx));
  batch.f_unlabeled_scores = info.unlabeled_scores;

  twin_.step(batch, info.gamma, cfg_.loss, cfg_.C, cfg_.C_star);

  if (twin_.norm() > lemma3_bound_ + norm_slack(lemma3_bound_)) ++violations_;
}

double DiagnosticsEngine::mean_grad_norm2() const {
  if (rows_.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows_) s += r.grad_norm2;
  return s / static_cast<double>(rows_.size());
}

double DiagnosticsEngine::min_grad_norm2() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows_) best = std::min(best, r.grad_norm2);
  return rows_.empty() ? 0.0 : best;
}

DiagSummary DiagnosticsEngine::summarize(const Model& model,
                                         const std::vector<Vector>& probes) const {
  DiagSummary s;
  s.constants = constants_;
  s.final_gap2 = gap_estimate(model, twin_, probes);
  s.theorem1_applicable = constants_.theorem_rate && constants_.T > 0;
  if (s.theorem1_applicable) {
    s.gap_bound = constants_.D / std::sqrt(static_cast<double>(constants_.T));
    s.theorem1_pass = s.final_gap2 <= s.gap_bound;
  }
  s.mean_grad_norm2 = mean_grad_norm2();
  s.min_grad_norm2 = min_grad_norm2();
  s.lemma3_bound = lemma3_bound_;
  s.lemma3_violations = violations_;
  s.lemma3_pass = violations_ == 0;
  if (lipschitz_L_ && s.theorem1_applicable && !rows_.empty()) {
    // R* is not computable; the losses are nonnegative so R* >= 0 and
    // replacing it by 0 only loosens the bound.
    const double r1 = rows_.front().objective;
    const double T34 = std::pow(static_cast<double>(constants_.T), 0.75);
    const double T14 = std::pow(static_cast<double>(constants_.T), 0.25);
    const double E = r1 / constants_.theta +
                     constants_.theta * constants_.M * constants_.M * constants_.M_prime *
                         (std::sqrt(constants_.kappa) + std::sqrt(constants_.phi)) *
                         constants_.kappa;
    const double F = 2.0 * constants_.theta * constants_.M * constants_.M * (*lipschitz_L_) *
                     constants_.kappa;
    s.theorem2_bound = E / T14 + F / T34;
    s.theorem2_pass = s.mean_grad_norm2 <= *s.theorem2_bound;
  }
  return s;
}

void DiagnosticsEngine::write_csv(std::ostream& out) const { write_diag_csv(out, rows_); }

void write_diag_csv(std::ostream& out, const std::vector<DiagRow>& rows) {
  out << "iteration,gamma,gap2,h_norm,grad_norm2,objective\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  static_cast<long long>(r.iteration), r.gamma, r.gap2, r.h_norm, r.grad_norm2,
                  r.objective);
    out << buf;
  }
}

}  // namespace tsg
