#ifndef TSG_DIAGNOSTICS_HPP
#define TSG_DIAGNOSTICS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tsg/trainer.hpp"

namespace tsg {

// Constants of the convergence analysis for a given configuration.
// kappa bounds the kernel (1 for RBF), phi the per-feature product (2 for
// the sqrt(2) cosine features), M = C*M_l + C**M_u bounds the loss
// derivatives, M' = C*L' + C**U' the loss Lipschitz constants. D is the
// gap-bound constant theta^2 M^2 (sqrt(kappa) + sqrt(phi))^2 and only
// applies under the theorem-rate schedule.
struct TheoryConstants {
  double kappa = 1.0;
  double phi = 2.0;
  double M = 0.0;
  double M_prime = 0.0;
  double theta = 0.0;
  std::int64_t T = 0;
  double D = 0.0;
  bool theorem_rate = false;  // D is meaningful only when true
};

TheoryConstants theory_constants(const TrainConfig& cfg);

// Exact-kernel twin iterate h_t = sum_j beta_j k(z_j, .), updated in
// lockstep with the trainer but with exact kernel sections instead of
// random features. Loss derivatives are evaluated at the trainer's f_t
// scores, not at h_t's -- that coupling is what makes h_t the twin of f_t.
class KernelTwin {
 public:
  explicit KernelTwin(KernelSpec spec, std::size_t support_cap = 1u << 20);

  // Registers points whose h-scores are maintained incrementally across
  // steps (cheap reads thereafter).
  void track(std::vector<Vector> points);
  const std::vector<double>& tracked_scores() const { return tracked_scores_; }
  const Vector& tracked_point(std::size_t i) const { return tracked_points_[i]; }

  struct Batch {
    std::vector<const Vector*> labeled_x;
    std::vector<int> labeled_y;
    std::vector<double> f_labeled_scores;  // trainer's f_t at the same points
    std::vector<const Vector*> unlabeled_x;
    std::vector<double> f_unlabeled_scores;
  };

  // Shrinks every existing weight by (1 - gamma) and appends the sampled
  // points with weights -gamma*C*l'/B_l and -gamma*C**u'/B_u (zero-weight
  // points are skipped).
  void step(const Batch& batch, double gamma, const UnlabeledLoss& loss, double C,
            double C_star);

  double evaluate(const Vector& x) const;  // h_t(x), O(support)
  double norm2() const;                    // ||h_t||^2_H from maintained support scores
  double norm() const;
  std::size_t support_size() const { return weights_.size(); }
  const std::vector<Vector>& support_points() const { return points_; }
  const std::vector<double>& support_weights() const { return weights_; }
  const KernelSpec& spec() const { return spec_; }

  // Two independent routes to ||h||^2 for cross-checking: dense Gram
  // quadratic form vs direct pairwise summation.
  double norm2_quadform() const;
  double norm2_pairwise() const;

 private:
  void append(const Vector& x, double weight);

  KernelSpec spec_;
  std::size_t cap_;
  std::vector<Vector> points_;
  std::vector<double> weights_;
  std::vector<double> support_scores_;  // h_t at each support point
  std::vector<Vector> tracked_points_;
  std::vector<double> tracked_scores_;
};

// Mean of |f(x) - h(x)|^2 over probe points; the quantity Theorem 1 bounds
// by D / sqrt(T) under the theorem-rate schedule.
double gap_estimate(const Model& model, const KernelTwin& twin, const std::vector<Vector>& probes);

// ||grad R(h)||^2_H with grad R(h) = h + (C/n_l) sum_l l'(h(x),y) k(x,.)
// + (C*/n_u) sum_u u'(h(x)) k(x,.), computed as one kernel expansion over
// support and data points via the Gram quadratic form. Desk scale only.
double rkhs_grad_norm(const KernelTwin& twin, const std::vector<Vector>& labeled_x,
                      const std::vector<int>& labeled_y, const std::vector<Vector>& unlabeled_x,
                      double C, double C_star, const UnlabeledLoss& loss,
                      std::size_t point_cap = 6000);

// R(.) of the practical objective: 0.5||.||^2 + (C/n_l) sum hinge +
// C* mean unlabeled loss. The twin uses its exact RKHS norm; the Model
// uses the feature-space norm sum_i ||alpha_i||^2 as a surrogate.
double objective_value(const KernelTwin& twin, const std::vector<Vector>& labeled_x,
                       const std::vector<int>& labeled_y, const std::vector<Vector>& unlabeled_x,
                       double C, double C_star, const UnlabeledLoss& loss);
double objective_value(const Model& model, const SemiDataset& data, double C, double C_star,
                       const UnlabeledLoss& loss);

struct DiagRow {
  std::int64_t iteration = 0;  // state entering this iteration (t = 1 is the zero function)
  double gamma = 0.0;
  double gap2 = 0.0;        // mean (f_t - h_t)^2 over the sampled batch
  double h_norm = 0.0;      // ||h_t||_H
  double grad_norm2 = 0.0;  // ||grad R(h_t)||^2_H
  double objective = 0.0;   // R(h_t)
};

struct DiagSummary {
  TheoryConstants constants;
  double final_gap2 = 0.0;        // probe-based, at t = T
  double gap_bound = 0.0;         // D / sqrt(T) (theorem-rate only)
  bool theorem1_applicable = false;
  bool theorem1_pass = false;
  double mean_grad_norm2 = 0.0;   // average over t = 1..T
  double min_grad_norm2 = 0.0;
  double lemma3_bound = 0.0;      // sqrt(kappa) * M
  std::int64_t lemma3_violations = 0;
  bool lemma3_pass = false;
  // Theorem 2's full bound needs the Lipschitz-gradient constant L, which
  // the analysis does not make computable; filled only when the caller
  // supplies an estimate.
  std::optional<double> theorem2_bound;
  std::optional<bool> theorem2_pass;
};

// Runs the exact-kernel twin in lockstep with a training run via the
// trainer's observer hook, recording the per-iteration diagnostic series
// and checking the norm bound ||h_t|| <= sqrt(kappa) * M at every step.
class DiagnosticsEngine {
 public:
  static constexpr std::size_t kMaxPoolPoints = 2048;

  DiagnosticsEngine(const TrainConfig& cfg, const SemiDataset& data,
                    std::optional<double> lipschitz_L = std::nullopt);

  // Bind into train(); the engine must outlive the run.
  TrainObserver observer();

  const std::vector<DiagRow>& rows() const { return rows_; }
  const KernelTwin& twin() const { return twin_; }
  std::int64_t lemma3_violations() const { return violations_; }
  double lemma3_bound() const { return lemma3_bound_; }
  double mean_grad_norm2() const;
  double min_grad_norm2() const;

  DiagSummary summarize(const Model& model, const std::vector<Vector>& probes) const;

  void write_csv(std::ostream& out) const;

 private:
  void on_step(const StepInfo& info);
  double grad_norm2_now() const;
  double objective_now() const;

  TrainConfig cfg_;
  TheoryConstants constants_;
  std::optional<double> lipschitz_L_;
  double lemma3_bound_ = 0.0;
  std::int64_t violations_ = 0;
  std::size_t n_labeled_ = 0;
  std::size_t n_unlabeled_ = 0;
  std::vector<int> labeled_y_;
  Matrix data_gram_;  // over labeled then unlabeled points
  KernelTwin twin_;
  std::vector<DiagRow> rows_;
};

void write_diag_csv(std::ostream& out, const std::vector<DiagRow>& rows);

}  // namespace tsg

#endif
