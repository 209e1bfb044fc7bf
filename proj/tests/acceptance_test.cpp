// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line with the measured numbers.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tsg/baseline.hpp"
#include "tsg/data.hpp"
#include "tsg/diagnostics.hpp"
#include "tsg/model.hpp"
#include "tsg/rng.hpp"
#include "tsg/synth.hpp"
#include "tsg/trainer.hpp"

namespace fs = std::filesystem;
using namespace tsg;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(bool pass, const char* label, const std::string& detail) {
  std::printf("[%s] %s%s%s\n", pass ? "PASS" : "FAIL", label, detail.empty() ? "" : " -- ",
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

SemiDataset split_synth(std::size_t n, std::size_t n_labeled, std::int32_t d, double shift,
                        std::uint64_t seed) {
  const auto synth = make_two_gaussians(n, d, shift, seed);
  SemiDataset data;
  data.d = d;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_labeled) {
      data.labeled_x.push_back(synth.x[i]);
      data.labeled_y.push_back(synth.y[i]);
    } else {
      data.unlabeled_x.push_back(synth.x[i]);
    }
  }
  return data;
}

std::vector<Vector> dense_probes(std::size_t count, std::int32_t d, double shift,
                                 std::uint64_t seed) {
  const auto synth = make_two_gaussians(count, d, shift, seed);
  std::vector<Vector> out;
  out.reserve(count);
  for (const auto& x : synth.x) out.push_back(x.to_dense(d));
  return out;
}

// The synthetic diagnostics problem shared by criteria 2-4: n_l = n_u =
// 200 points, SSHG, C = C* = 1, theorem-rate theta = 1.
TrainConfig theorem_config(std::int64_t T, int seed_index) {
  TrainConfig cfg;
  cfg.C = 1.0;
  cfg.C_star = 1.0;
  cfg.sigma = 1.0;
  cfg.schedule = TheoremRate{1.0};
  cfg.T = T;
  cfg.batch_labeled = 1;
  cfg.batch_unlabeled = 1;
  cfg.loss.kind = UnlabeledLossKind::SSHG;
  cfg.m = 20;  // default ceil(sqrt(400))
  cfg.base_seed = 1000 + 2 * seed_index;
  cfg.data_seed = 2000 + 2 * seed_index;
  return cfg;
}

struct TheoremRun {
  double final_gap2 = 0.0;
  double mean_grad_norm2 = 0.0;
  std::int64_t lemma3_violations = 0;
};

TheoremRun run_theorem_problem(std::int64_t T, int seed_index) {
  const SemiDataset data = split_synth(400, 200, 5, 2.0, 7000 + seed_index);
  const TrainConfig cfg = theorem_config(T, seed_index);
  DiagnosticsEngine engine(cfg, data);
  const Model model = train(cfg, data, engine.observer());
  const auto probes = dense_probes(100, 5, 2.0, 90000 + seed_index);
  TheoremRun out;
  out.final_gap2 = gap_estimate(model, engine.twin(), probes);
  out.mean_grad_norm2 = engine.mean_grad_norm2();
  out.lemma3_violations = engine.lemma3_violations();
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TSG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() /
          ("tsg_acceptance_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("criterion 1: kernel approximation convergence") {
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSpec spec{1.0};
  const int d = 5, blocks = 20, m = 5000;  // N*m = 1e5 features
  RngStream rng(CounterRng::derive_key(31337, 1));

  double worst = 0.0;
  for (int pair = 0; pair < 50; ++pair) {
    Vector a(d), b(d);
    for (int j = 0; j < d; ++j) {
      a[j] = rng.next_gaussian() * 0.6;
      b[j] = rng.next_gaussian() * 0.6;
    }
    const double exact = exact_rbf(a, b, spec);
    double mean = 0.0;
    for (int i = 0; i < blocks; ++i) {
      const FeatureBlock block =
          spawn_feature_block(4242, static_cast<std::uint64_t>(pair * blocks + i), m, d, spec);
      mean += approx_kernel(block, a, b);
    }
    mean /= blocks;
    worst = std::max(worst, std::abs(mean - exact));
  }
  const double elapsed = seconds_since(t0);

  const bool pass = worst < 0.02 && elapsed < 10.0;
  report(pass, "criterion 1: kernel approximation convergence",
         fmt("max |mc - exact| = %.5f over 50 pairs at N*m = 1e5 (< 0.02), %.1fs (< 10s)",
             worst, elapsed));
  CHECK(worst < 0.02);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 2: Theorem 1 gap bound") {
  const auto t0 = std::chrono::steady_clock::now();
  const int seeds = 20;
  const double D = 12.0 + 8.0 * std::sqrt(2.0);  // theta^2 M^2 (1 + sqrt 2)^2, M = 2

  double mean64 = 0.0, mean256 = 0.0;
  std::int64_t violations = 0;
  for (int r = 0; r < seeds; ++r) {
    const TheoremRun a = run_theorem_problem(64, r);
    const TheoremRun b = run_theorem_problem(256, r);
    mean64 += a.final_gap2;
    mean256 += b.final_gap2;
    violations += a.lemma3_violations + b.lemma3_violations;
  }
  mean64 /= seeds;
  mean256 /= seeds;
  const double bound64 = D / std::sqrt(64.0), bound256 = D / std::sqrt(256.0);
  const double elapsed = seconds_since(t0);

  const bool pass = mean64 <= bound64 && mean256 <= bound256 && mean256 < mean64 &&
                    violations == 0 && elapsed < 120.0;
  report(pass, "criterion 2: Theorem 1 gap bound",
         fmt("gap2(T=64) = %.4f <= %.4f, gap2(T=256) = %.4f <= %.4f, decay %s, %.1fs (< 120s)",
             mean64, bound64, mean256, bound256, mean256 < mean64 ? "yes" : "NO", elapsed));
  CHECK(mean64 <= bound64);
  CHECK(mean256 <= bound256);
  CHECK(mean256 < mean64);
  CHECK(violations == 0);
  CHECK(elapsed < 120.0);
}

TEST_CASE("criterion 3: Lemma 3 runtime assertion") {
  // Diagnostic runs across the loss family, both schedules, and the
  // gamma = 1 boundary; the twin's norm must never leave the ball.
  std::int64_t violations = 0;
  int runs = 0;
  const UnlabeledLossKind kinds[] = {UnlabeledLossKind::SHG, UnlabeledLossKind::SSHG,
                                     UnlabeledLossKind::Ramp, UnlabeledLossKind::DA};
  for (int k = 0; k < 4; ++k) {
    for (int sched = 0; sched < 3; ++sched) {
      const SemiDataset data = split_synth(120, 40, 5, 2.0, 300 + k * 10 + sched);
      TrainConfig cfg;
      cfg.C = 1.0 + k;
      cfg.C_star = sched == 2 ? 0.0 : 0.8;
      cfg.sigma = 0.5;
      cfg.T = 32;
      if (sched == 0)
        cfg.schedule = TheoremRate{1.0};
      else if (sched == 1)
        cfg.schedule = TheoremRate{std::pow(32.0, 0.75)};  // gamma = 1 boundary
      else
        cfg.schedule = ConstantRate{1.0};  // gamma = 1 constant
      cfg.batch_labeled = 2;
      cfg.batch_unlabeled = 2;
      cfg.loss.kind = kinds[k];
      if (cfg.loss.kind == UnlabeledLossKind::Ramp) cfg.loss.ramp_s = -0.5;
      cfg.m = 8;
      cfg.base_seed = 61 + runs;
      cfg.data_seed = 62 + runs;

      DiagnosticsEngine engine(cfg, data);
      train(cfg, data, engine.observer());
      violations += engine.lemma3_violations();
      ++runs;
    }
  }
  const bool pass = violations == 0;
  report(pass, "criterion 3: Lemma 3 norm bound",
         fmt("%lld violations across %d diagnostic runs (zero tolerated)",
             static_cast<long long>(violations), runs));
  CHECK(violations == 0);
}

TEST_CASE("criterion 4: Theorem 2 gradient-norm trend") {
  const auto t0 = std::chrono::steady_clock::now();
  const int seeds = 20;
  double mean64 = 0.0, mean128 = 0.0, mean256 = 0.0;
  std::int64_t violations = 0;
  for (int r = 0; r < seeds; ++r) {
    const TheoremRun a = run_theorem_problem(64, r);
    const TheoremRun b = run_theorem_problem(128, r);
    const TheoremRun c = run_theorem_problem(256, r);
    mean64 += a.mean_grad_norm2;
    mean128 += b.mean_grad_norm2;
    mean256 += c.mean_grad_norm2;
    violations += a.lemma3_violations + b.lemma3_violations + c.lemma3_violations;
  }
  mean64 /= seeds;
  mean128 /= seeds;
  mean256 /= seeds;
  const double elapsed = seconds_since(t0);

  const bool pass =
      mean64 > mean128 && mean128 > mean256 && violations == 0 && elapsed < 180.0;
  report(pass, "criterion 4: Theorem 2 gradient-norm trend",
         fmt("mean ||grad R||^2: T=64 %.4f > T=128 %.4f > T=256 %.4f, %.1fs (< 180s)", mean64,
             mean128, mean256, elapsed));
  CHECK(mean64 > mean128);
  CHECK(mean128 > mean256);
  CHECK(violations == 0);
  CHECK(elapsed < 180.0);
}

TEST_CASE("criterion 5: trainer equivalence oracle") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = oracles::random_small_case(seed);
    const Model model = train(c.cfg, c.data);
    const auto eager = oracles::eager_train(c.cfg, c.data);
    REQUIRE(model.iterations() == static_cast<std::int64_t>(eager.coefficients.size()));
    worst = std::max(worst, oracles::max_rel_err(model.coefficients, eager.coefficients));
  }
  const bool pass = worst < 1e-9;
  report(pass, "criterion 5: lazy vs eager trainer equivalence",
         fmt("max element-wise relative error %.3g over 10 random small configs (< 1e-9)",
             worst));
  CHECK(worst < 1e-9);
}

TEST_CASE("criterion 6: end-to-end determinism") {
  Workspace ws;
  {
    const auto synth = make_two_gaussians(300, 4, 2.5, 99);
    std::vector<double> labels(synth.y.begin(), synth.y.end());
    std::ofstream out(ws.path("corpus.libsvm"));
    write_libsvm(out, synth.x, labels);
  }
  REQUIRE(run_cli("split --data " + ws.path("corpus.libsvm") +
                  " --n-labeled 50 --seed 5 --out " + ws.path("split")) == 0);
  const std::string train_flags =
      " --labeled " + ws.path("split/labeled.libsvm") + " --unlabeled " +
      ws.path("split/unlabeled.libsvm") +
      " --T 8 --m 16 --batch-labeled 16 --batch-unlabeled 32 --seed 11 --data-seed 12";
  REQUIRE(run_cli("train" + train_flags + " --model " + ws.path("a.tsg")) == 0);
  REQUIRE(run_cli("train" + train_flags + " --model " + ws.path("b.tsg")) == 0);
  REQUIRE(run_cli("predict --model " + ws.path("a.tsg") + " --data " +
                  ws.path("split/unlabeled.libsvm") + " --out " + ws.path("a.scores")) == 0);
  REQUIRE(run_cli("predict --model " + ws.path("b.tsg") + " --data " +
                  ws.path("split/unlabeled.libsvm") + " --out " + ws.path("b.scores")) == 0);

  const bool models_equal = slurp(ws.dir / "a.tsg") == slurp(ws.dir / "b.tsg");
  const bool scores_equal = slurp(ws.dir / "a.scores") == slurp(ws.dir / "b.scores");
  const bool nonempty = !slurp(ws.dir / "a.tsg").empty() && !slurp(ws.dir / "a.scores").empty();
  const bool pass = models_equal && scores_equal && nonempty;
  report(pass, "criterion 6: end-to-end determinism",
         fmt("model files byte-identical: %s, score files identical: %s",
             models_equal ? "yes" : "NO", scores_equal ? "yes" : "NO"));
  CHECK(models_equal);
  CHECK(scores_equal);
  CHECK(nonempty);
}

TEST_CASE("criterion 7: loss derivative checks") {
  RngStream rng(515151);
  double worst = 0.0;
  for (auto kind : {UnlabeledLossKind::SSHG, UnlabeledLossKind::DA}) {
    UnlabeledLoss loss;
    loss.kind = kind;
    int checked = 0;
    while (checked < 10000) {
      const double r = 6.0 * (rng.next_uniform01() - 0.5);
      if (kind == UnlabeledLossKind::SSHG &&
          (std::abs(std::abs(r) - 1.0) < 1e-3 || std::abs(r) < 1e-3))
        continue;  // stay 1e-3 away from the kinks (and the |r| corner)
      const double h = 1e-5;
      const double fd = (unlabeled(loss, r + h).value - unlabeled(loss, r - h).value) / (2 * h);
      worst = std::max(worst, std::abs(unlabeled(loss, r).derivative - fd));
      ++checked;
    }
  }

  bool odd_ok = true;
  for (auto kind : {UnlabeledLossKind::SHG, UnlabeledLossKind::SSHG}) {
    UnlabeledLoss loss;
    loss.kind = kind;
    for (int i = 0; i < 10000; ++i) {
      const double r = 4.0 * (rng.next_uniform01() - 0.5);
      if (unlabeled(loss, r).derivative != -unlabeled(loss, -r).derivative) odd_ok = false;
    }
  }

  const bool pass = worst < 1e-6 && odd_ok;
  report(pass, "criterion 7: loss derivative checks",
         fmt("max |analytic - central difference| = %.3g over 2x1e4 points (< 1e-6), "
             "SHG/SSHG oddness %s",
             worst, odd_ok ? "exact" : "VIOLATED"));
  CHECK(worst < 1e-6);
  CHECK(odd_ok);
}

namespace {

// Shared configuration for the semi-supervised gain and baseline
// comparisons (criteria 8 and 9): two unit Gaussians at +-(2, 0, ...) in
// d = 5, 4 labeled + 2000 unlabeled points, SHG loss. C* sits well below
// C: the labeled anchor has to dominate or the unlabeled force collapses
// every score onto one side. Settings frozen from pilot runs.
struct SuiteErrors {
  double semi = 0.0;
  double supervised = 0.0;
  double frs = 0.0;
};

SuiteErrors synthetic_suite_errors(int seeds) {
  SuiteErrors acc;
  for (int r = 0; r < seeds; ++r) {
    const auto corpus = make_two_gaussians(2004, 5, 2.0, 100 + r);
    const SemiSplit split = make_semi_split(corpus.x, corpus.y, 4, 500 + r);
    const auto test = make_two_gaussians(1000, 5, 2.0, 9000 + r);

    TrainConfig cfg;
    cfg.C = 10.0;
    cfg.C_star = 2.0;
    cfg.sigma = 0.1;
    cfg.schedule = ConstantRate{10.0};
    cfg.T = 300;
    cfg.batch_labeled = 4;
    cfg.batch_unlabeled = 32;
    cfg.loss.kind = UnlabeledLossKind::SHG;
    cfg.m = 32;
    cfg.base_seed = 10 * r + 1;
    cfg.data_seed = 10 * r + 2;

    const Model semi = train(cfg, split.data);
    TrainConfig sup_cfg = cfg;
    sup_cfg.C_star = 0.0;
    const Model sup = train(sup_cfg, split.data);

    BaselineConfig frs_cfg;
    frs_cfg.C = cfg.C;
    frs_cfg.C_star = cfg.C_star;
    frs_cfg.sigma = cfg.sigma;
    frs_cfg.schedule = cfg.schedule;
    frs_cfg.passes = 10;
    frs_cfg.batch_labeled = cfg.batch_labeled;
    frs_cfg.batch_unlabeled = cfg.batch_unlabeled;
    frs_cfg.loss = cfg.loss;
    frs_cfg.m_total = cfg.m;
    frs_cfg.base_seed = cfg.base_seed;
    frs_cfg.data_seed = cfg.data_seed;
    const LinearRFModel frs = train_frs3vm(frs_cfg, split.data);

    acc.semi += error_rate(Predictor(semi).scores(test.x), test.y);
    acc.supervised += error_rate(Predictor(sup).scores(test.x), test.y);
    acc.frs += error_rate(predict_linear(frs, test.x), test.y);
  }
  acc.semi /= seeds;
  acc.supervised /= seeds;
  acc.frs /= seeds;
  return acc;
}

}  // namespace

TEST_CASE("criterion 8: semi-supervised gain") {
  const SuiteErrors e = synthetic_suite_errors(20);
  const double gain = e.supervised - e.semi;
  const bool pass = gain >= 0.05;
  report(pass, "criterion 8: semi-supervised gain",
         fmt("mean test error: semi %.4f vs supervised-only %.4f, gain %.4f (>= 0.05)", e.semi,
             e.supervised, gain));
  CHECK(gain >= 0.05);
}

TEST_CASE("criterion 9: baseline non-inferiority") {
  const SuiteErrors e = synthetic_suite_errors(20);
  const bool pass = e.semi <= e.frs + 0.02;
  report(pass, "criterion 9: baseline non-inferiority",
         fmt("mean test error: TSG %.4f <= FRS %.4f + 0.02", e.semi, e.frs));
  CHECK(e.semi <= e.frs + 0.02);
}

TEST_CASE("criterion 10: complexity scaling") {
  const SemiDataset data = split_synth(500, 50, 5, 2.0, 77);
  auto timed_train = [&](std::int64_t T) {
    TrainConfig cfg;
    cfg.C = 1.0;
    cfg.C_star = 0.1;
    cfg.sigma = 0.5;
    cfg.schedule = ConstantRate{10.0};
    cfg.T = T;
    cfg.batch_labeled = 1;
    cfg.batch_unlabeled = 1;
    cfg.m = 32;
    cfg.base_seed = 5;
    cfg.data_seed = 6;
    const auto t0 = std::chrono::steady_clock::now();
    Model model = train(cfg, data);
    return std::pair<double, Model>(seconds_since(t0), std::move(model));
  };

  auto [t1024, m1024] = timed_train(1024);
  auto [t2048, m2048] = timed_train(2048);
  const double train_ratio = t2048 / t1024;

  const auto probes = make_two_gaussians(400, 5, 2.0, 123);
  auto timed_predict = [&](const Model& model) {
    Predictor predictor(model, false);
    const auto t0 = std::chrono::steady_clock::now();
    volatile double sink = 0.0;
    for (const auto& x : probes.x) sink = sink + predictor.score(x);
    (void)sink;
    return seconds_since(t0);
  };
  const double p1024 = timed_predict(m1024);
  const double p2048 = timed_predict(m2048);
  const double predict_ratio = p2048 / p1024;  // linear in T means ~2.0

  const bool pass = train_ratio >= 3.0 && train_ratio <= 5.0 && predict_ratio >= 1.6 &&
                    predict_ratio <= 2.4;
  report(pass, "criterion 10: complexity scaling",
         fmt("train time(2048)/time(1024) = %.2f (in [3,5]); predict ratio %.2f "
             "(linear in T within 20%%: [1.6, 2.4])",
             train_ratio, predict_ratio));
  CHECK(train_ratio >= 3.0);
  CHECK(train_ratio <= 5.0);
  CHECK(predict_ratio >= 1.6);
  CHECK(predict_ratio <= 2.4);
}

TEST_CASE("criterion 11: grid search contract") {
  Workspace ws;
  {
    const auto synth = make_two_gaussians(340, 5, 3.5, 17);  // cleanly separable
    std::vector<double> labels(synth.y.begin(), synth.y.end());
    std::ofstream out(ws.path("corpus.libsvm"));
    write_libsvm(out, synth.x, labels);
  }
  REQUIRE(run_cli("split --data " + ws.path("corpus.libsvm") +
                  " --n-labeled 40 --seed 3 --out " + ws.path("split")) == 0);
  const std::string grid_flags =
      "gridsearch --labeled " + ws.path("split/labeled.libsvm") + " --unlabeled " +
      ws.path("split/unlabeled.libsvm") + " --truth " + ws.path("split/truth.labels") +
      " --T 30 --m 24 --batch-labeled 64 --batch-unlabeled 64 --seed 7 --data-seed 8 "
      "--jobs 2 --out ";
  REQUIRE(run_cli(grid_flags + ws.path("grid_a.csv")) == 0);
  REQUIRE(run_cli(grid_flags + ws.path("grid_b.csv")) == 0);

  const std::string csv = slurp(ws.dir / "grid_a.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  const bool header_ok = line == "phase,C,sigma,eta,cv_error";
  std::size_t rows = 0;
  double best_err = 1.0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    const auto last_comma = line.rfind(',');
    best_err = std::min(best_err, std::atof(line.c_str() + last_comma + 1));
  }
  const bool deterministic = csv == slurp(ws.dir / "grid_b.csv");

  const bool pass = header_ok && rows == 53 && deterministic && best_err < 0.05;
  report(pass, "criterion 11: grid search contract",
         fmt("rows = %zu (= 49 + 4), deterministic: %s, best CV error %.4f (< 0.05)", rows,
             deterministic ? "yes" : "NO", best_err));
  CHECK(header_ok);
  CHECK(rows == 53);
  CHECK(deterministic);
  CHECK(best_err < 0.05);
}
