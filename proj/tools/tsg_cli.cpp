// Command-line front end: split / train / predict / eval / gridsearch /
// bench. Every run writes a JSON manifest sufficient to reproduce it.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsg/baseline.hpp"
#include "tsg/data.hpp"
#include "tsg/diagnostics.hpp"
#include "tsg/errors.hpp"
#include "tsg/model.hpp"
#include "tsg/rng.hpp"
#include "tsg/synth.hpp"
#include "tsg/trainer.hpp"
#include "tsg/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Exit codes: 0 success, 2 usage, 3 parse, 4 config, 5 divergence,
// 6 resource.
enum ExitCode { kOk = 0, kUsage = 2, kParse = 3, kConfig = 4, kDivergence = 5, kResource = 6 };

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tsg::ParseError("cannot open file for digest: " + path);
  std::uint64_t h = 0xCBF29CE484222325ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
  }
  std::ostringstream hex;
  hex << std::hex << h;
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw tsg::ParseError("cannot write file: " + path);
  out << content;
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<int> read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tsg::ParseError("cannot open label file: " + path);
  std::vector<double> raw;
  double v;
  while (in >> v) raw.push_back(v);
  return tsg::map_labels(raw);
}

struct LoadedPair {
  tsg::SemiDataset data;
  std::string labeled_digest;
  std::string unlabeled_digest;
};

LoadedPair load_semi(const std::string& labeled_path, const std::string& unlabeled_path) {
  LoadedPair out;
  const tsg::ParsedData labeled = tsg::parse_libsvm_file(labeled_path);
  const tsg::ParsedData unlabeled = tsg::parse_libsvm_file(unlabeled_path);
  out.data.labeled_x = labeled.x;
  out.data.labeled_y = tsg::map_labels(labeled.raw_labels);
  out.data.unlabeled_x = unlabeled.x;
  out.data.d = std::max(labeled.d, unlabeled.d);
  out.labeled_digest = hex64(fnv1a64_file(labeled_path));
  out.unlabeled_digest = hex64(fnv1a64_file(unlabeled_path));
  return out;
}

json scaler_to_json(const tsg::ScalerParams& p) {
  return json{{"min", p.min}, {"max", p.max}};
}

tsg::ScalerParams scaler_from_json(const json& j) {
  tsg::ScalerParams p;
  p.min = j.at("min").get<std::vector<double>>();
  p.max = j.at("max").get<std::vector<double>>();
  if (p.min.size() != p.max.size())
    throw tsg::FormatError("scaler min/max lengths disagree");
  return p;
}

// Shared hyperparameter flags (the normative CLI surface).
struct HyperFlags {
  double C = 1.0;
  std::optional<double> Cstar;
  double sigma = 1.0;
  double eta = 10.0;
  std::optional<double> theta;
  std::optional<std::int64_t> T;
  std::int32_t batch_labeled = 256;
  std::int32_t batch_unlabeled = 256;
  std::optional<std::int32_t> m;
  std::int64_t seed = 1;
  std::int64_t data_seed = 2;
  int passes = 1;
  std::string loss = "shg";
  bool table_fidelity = false;
  bool no_scale = false;
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& h) {
  cmd->add_option("--C", h.C, "labeled regularization weight");
  cmd->add_option("--Cstar", h.Cstar, "unlabeled weight (default C*n_l/n_u)");
  cmd->add_option("--sigma", h.sigma, "RBF kernel parameter");
  cmd->add_option("--eta", h.eta, "constant step size gamma = 1/eta");
  cmd->add_option("--theta", h.theta, "use gamma = theta/T^(3/4) instead of 1/eta");
  cmd->add_option("--T", h.T, "iteration count (default: one pass over the unlabeled pool)");
  cmd->add_option("--batch-labeled", h.batch_labeled, "labeled mini-batch size");
  cmd->add_option("--batch-unlabeled", h.batch_unlabeled, "unlabeled mini-batch size");
  cmd->add_option("--m", h.m, "random features per iteration (default ceil(sqrt(n)))");
  cmd->add_option("--seed", h.seed, "feature-block base seed");
  cmd->add_option("--data-seed", h.data_seed, "instance sampling seed");
  cmd->add_option("--passes", h.passes, "passes over the unlabeled pool when --T is unset");
  cmd->add_option("--loss", h.loss, "unlabeled loss: shg | sshg | ramp:<s> | da");
  cmd->add_flag("--table-fidelity", h.table_fidelity,
                "reproduce the published SHG/SSHG derivatives verbatim (no sign factor)");
  cmd->add_flag("--no-scale", h.no_scale, "disable min-max feature scaling");
}

tsg::TrainConfig build_config(const HyperFlags& h, const tsg::SemiDataset& data) {
  tsg::TrainConfig cfg;
  cfg.C = h.C;
  cfg.C_star = h.Cstar ? *h.Cstar
                       : tsg::default_c_star(h.C, data.n_labeled(), data.n_unlabeled());
  cfg.sigma = h.sigma;
  if (h.theta)
    cfg.schedule = tsg::TheoremRate{*h.theta};
  else
    cfg.schedule = tsg::ConstantRate{h.eta};
  cfg.T = h.T ? *h.T : tsg::one_pass_iterations(data.n_unlabeled(), h.batch_unlabeled, h.passes);
  cfg.batch_labeled = h.batch_labeled;
  cfg.batch_unlabeled = h.batch_unlabeled;
  cfg.loss = tsg::parse_loss_name(h.loss);
  cfg.loss.table_fidelity = h.table_fidelity;
  cfg.m = h.m ? *h.m : tsg::default_feature_count(data.n_total());
  cfg.base_seed = h.seed;
  cfg.data_seed = h.data_seed;
  return cfg;
}

json hyper_to_json(const tsg::TrainConfig& cfg) {
  json j;
  j["C"] = cfg.C;
  j["Cstar"] = cfg.C_star;
  j["sigma"] = cfg.sigma;
  if (const auto* c = std::get_if<tsg::ConstantRate>(&cfg.schedule)) {
    j["schedule"] = "constant";
    j["eta"] = c->eta;
  } else {
    j["schedule"] = "theorem";
    j["theta"] = std::get<tsg::TheoremRate>(cfg.schedule).theta;
  }
  j["T"] = cfg.T;
  j["batch_labeled"] = cfg.batch_labeled;
  j["batch_unlabeled"] = cfg.batch_unlabeled;
  j["loss"] = tsg::loss_name(cfg.loss);
  j["table_fidelity"] = cfg.loss.table_fidelity;
  j["m"] = cfg.m;
  j["seed"] = cfg.base_seed;
  j["data_seed"] = cfg.data_seed;
  return j;
}

json manifest_skeleton(const std::string& command) {
  json j;
  j["command"] = command;
  j["library_version"] = TSG_VERSION_STRING;
  return j;
}

// ---------------------------------------------------------------- split --

struct SplitArgs {
  std::string data;
  std::size_t n_labeled = 200;
  std::int64_t seed = 1;
  std::string out_dir;
};

void run_split(const SplitArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const tsg::ParsedData parsed = tsg::parse_libsvm_file(args.data);
  const std::vector<int> y = tsg::map_labels(parsed.raw_labels);
  const tsg::SemiSplit split =
      tsg::make_semi_split(parsed.x, y, args.n_labeled, static_cast<std::uint64_t>(args.seed));

  fs::create_directories(args.out_dir);
  const std::string labeled_path = (fs::path(args.out_dir) / "labeled.libsvm").string();
  const std::string unlabeled_path = (fs::path(args.out_dir) / "unlabeled.libsvm").string();
  const std::string truth_path = (fs::path(args.out_dir) / "truth.labels").string();

  {
    std::ofstream out(labeled_path);
    std::vector<double> labels(split.data.labeled_y.begin(), split.data.labeled_y.end());
    tsg::write_libsvm(out, split.data.labeled_x, labels);
  }
  {
    std::ofstream out(unlabeled_path);
    std::vector<double> zeros(split.data.n_unlabeled(), 0.0);
    tsg::write_libsvm(out, split.data.unlabeled_x, zeros);
  }
  {
    std::ostringstream out;
    for (int label : split.hidden_labels) out << label << '\n';
    write_text_file(truth_path, out.str());
  }

  json manifest = manifest_skeleton("split");
  manifest["data"] = args.data;
  manifest["data_digest"] = hex64(fnv1a64_file(args.data));
  manifest["seed"] = args.seed;
  manifest["n_labeled"] = split.data.n_labeled();
  manifest["n_unlabeled"] = split.data.n_unlabeled();
  manifest["d"] = split.data.d;
  manifest["labeled_indices"] = split.labeled_idx;
  manifest["unlabeled_indices"] = split.unlabeled_idx;
  manifest["outputs"] = {labeled_path, unlabeled_path, truth_path};
  manifest["wall_seconds"] = seconds_since(t0);
  write_json_file((fs::path(args.out_dir) / "split.json").string(), manifest);

  std::cout << "split: " << split.data.n_labeled() << " labeled, "
            << split.data.n_unlabeled() << " unlabeled, d = " << split.data.d << "\n";
}

// ---------------------------------------------------------------- train --

struct TrainArgs {
  std::string labeled;
  std::string unlabeled;
  std::string model;
  std::string manifest;
  std::string diagnose;
  int probes = 100;
  std::optional<double> lipschitz_L;
  HyperFlags hyper;
};

void run_train(const TrainArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  LoadedPair loaded = load_semi(args.labeled, args.unlabeled);

  std::optional<tsg::ScalerParams> scaler;
  if (!args.hyper.no_scale) {
    std::vector<tsg::SparseVec> all = loaded.data.labeled_x;
    all.insert(all.end(), loaded.data.unlabeled_x.begin(), loaded.data.unlabeled_x.end());
    scaler = tsg::scale_fit(all, loaded.data.d);
    tsg::apply_scaling(*scaler, loaded.data);
  }

  const tsg::TrainConfig cfg = build_config(args.hyper, loaded.data);

  std::optional<tsg::DiagnosticsEngine> engine;
  if (!args.diagnose.empty()) engine.emplace(cfg, loaded.data, args.lipschitz_L);

  const tsg::Model model =
      tsg::train(cfg, loaded.data, engine ? engine->observer() : tsg::TrainObserver{});
  tsg::save(model, args.model);
  if (scaler) write_json_file(args.model + ".scaler.json", scaler_to_json(*scaler));

  json manifest = manifest_skeleton("train");
  manifest["labeled"] = args.labeled;
  manifest["unlabeled"] = args.unlabeled;
  manifest["labeled_digest"] = loaded.labeled_digest;
  manifest["unlabeled_digest"] = loaded.unlabeled_digest;
  manifest["n_labeled"] = loaded.data.n_labeled();
  manifest["n_unlabeled"] = loaded.data.n_unlabeled();
  manifest["d"] = loaded.data.d;
  manifest["scaled"] = !args.hyper.no_scale;
  manifest["config"] = hyper_to_json(cfg);
  manifest["model"] = args.model;
  manifest["model_digest"] = hex64(fnv1a64_file(args.model));

  if (engine) {
    // Probe points are drawn from the unlabeled pool with a stream
    // distinct from every training stream.
    tsg::RngStream rng(tsg::CounterRng::derive_key(
        static_cast<std::uint64_t>(cfg.data_seed), 0x9E0BE5ull));
    std::vector<tsg::Vector> probes;
    const int count = std::max(1, args.probes);
    for (int i = 0; i < count; ++i) {
      const auto idx = rng.next_index(static_cast<std::uint32_t>(loaded.data.n_unlabeled()));
      probes.push_back(loaded.data.unlabeled_x[idx].to_dense(std::max<std::int32_t>(1, loaded.data.d)));
    }
    const tsg::DiagSummary summary = engine->summarize(model, probes);

    std::ofstream csv(args.diagnose + ".csv");
    engine->write_csv(csv);

    json dj;
    dj["constants"] = {{"kappa", summary.constants.kappa},
                       {"phi", summary.constants.phi},
                       {"M", summary.constants.M},
                       {"M_prime", summary.constants.M_prime},
                       {"theta", summary.constants.theta},
                       {"T", summary.constants.T},
                       {"D", summary.constants.D},
                       {"theorem_rate", summary.constants.theorem_rate}};
    dj["final_gap2"] = summary.final_gap2;
    dj["probe_count"] = count;
    dj["checks"]["theorem1_gap_bound"] =
        summary.theorem1_applicable
            ? json{{"applicable", true},
                   {"bound", summary.gap_bound},
                   {"value", summary.final_gap2},
                   {"pass", summary.theorem1_pass}}
            : json{{"applicable", false}};
    dj["checks"]["lemma3_norm_bound"] = {{"bound", summary.lemma3_bound},
                                         {"violations", summary.lemma3_violations},
                                         {"pass", summary.lemma3_pass}};
    if (summary.theorem2_bound) {
      dj["checks"]["theorem2_grad_bound"] = {{"applicable", true},
                                             {"bound", *summary.theorem2_bound},
                                             {"value", summary.mean_grad_norm2},
                                             {"pass", *summary.theorem2_pass}};
    } else {
      dj["checks"]["theorem2_grad_bound"] = {{"applicable", false},
                                             {"note", "supply --L to assert the full bound"}};
    }
    dj["mean_grad_norm2"] = summary.mean_grad_norm2;
    dj["min_grad_norm2"] = summary.min_grad_norm2;
    write_json_file(args.diagnose + ".json", dj);
    manifest["diagnostics_csv"] = args.diagnose + ".csv";
    manifest["diagnostics_json"] = args.diagnose + ".json";
  }

  manifest["wall_seconds"] = seconds_since(t0);
  const std::string manifest_path =
      args.manifest.empty() ? args.model + ".manifest.json" : args.manifest;
  write_json_file(manifest_path, manifest);

  std::cout << "train: T = " << cfg.T << ", m = " << cfg.m << ", model -> " << args.model
            << "\n";
}

// -------------------------------------------------------------- predict --

// Either container; models are distinguished by their magic bytes.
struct AnyModel {
  std::optional<tsg::Model> tsg;
  std::optional<tsg::LinearRFModel> frs;
  std::int32_t d() const { return tsg ? tsg->d : frs->d; }
};

AnyModel load_any_model(const std::string& path) {
  AnyModel out;
  try {
    out.tsg = tsg::load_model(path);
    return out;
  } catch (const tsg::FormatError&) {
  }
  out.frs = tsg::load_frs(path);
  return out;
}

std::vector<double> score_all(const AnyModel& model, const std::vector<tsg::SparseVec>& xs) {
  if (model.tsg) return tsg::Predictor(*model.tsg).scores(xs);
  return tsg::predict_linear(*model.frs, xs);
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string scaler;
};

std::vector<tsg::SparseVec> load_and_scale_inputs(const std::string& data_path,
                                                  const std::string& model_path,
                                                  const std::string& scaler_flag,
                                                  std::int32_t model_d,
                                                  std::vector<double>* raw_labels = nullptr) {
  const tsg::ParsedData parsed = tsg::parse_libsvm_file(data_path);
  if (parsed.d > model_d)
    throw tsg::ShapeError("data dimension " + std::to_string(parsed.d) +
                          " exceeds model dimension " + std::to_string(model_d));
  if (raw_labels) *raw_labels = parsed.raw_labels;

  std::string scaler_path = scaler_flag;
  if (scaler_path.empty() && fs::exists(model_path + ".scaler.json"))
    scaler_path = model_path + ".scaler.json";
  if (scaler_path.empty()) return parsed.x;

  std::ifstream in(scaler_path);
  if (!in) throw tsg::ParseError("cannot open scaler file: " + scaler_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw tsg::ParseError(std::string("bad scaler JSON: ") + e.what());
  }
  return tsg::scale_apply(scaler_from_json(j), parsed.x);
}

void run_predict(const PredictArgs& args) {
  const AnyModel model = load_any_model(args.model);
  const auto xs = load_and_scale_inputs(args.data, args.model, args.scaler, model.d());
  const auto scores = score_all(model, xs);

  std::ostringstream lines;
  char buf[64];
  for (double s : scores) {
    std::snprintf(buf, sizeof(buf), "%d %.17g\n", tsg::label_of(s), s);
    lines << buf;
  }
  if (args.out.empty() || args.out == "-")
    std::cout << lines.str();
  else
    write_text_file(args.out, lines.str());
}

// ----------------------------------------------------------------- eval --

struct EvalArgs {
  std::string model;
  std::string data;
  std::string truth;
  std::string out;
};

void run_eval(const EvalArgs& args) {
  const AnyModel model = load_any_model(args.model);
  std::vector<double> raw_labels;
  const auto xs =
      load_and_scale_inputs(args.data, args.model, "", model.d(), &raw_labels);
  const std::vector<int> y =
      args.truth.empty() ? tsg::map_labels(raw_labels) : read_label_file(args.truth);
  if (y.size() != xs.size())
    throw tsg::ShapeError("label count " + std::to_string(y.size()) +
                          " does not match instance count " + std::to_string(xs.size()));
  const double err = tsg::error_rate(score_all(model, xs), y);

  char line[64];
  std::snprintf(line, sizeof(line), "error_rate %.4f\n", err);
  std::cout << line;
  if (!args.out.empty()) {
    json j = manifest_skeleton("eval");
    j["model"] = args.model;
    j["data"] = args.data;
    j["error_rate"] = err;
    j["n"] = xs.size();
    write_json_file(args.out, j);
  }
}

// ----------------------------------------------------------- gridsearch --

struct GridArgs {
  std::string labeled;
  std::string unlabeled;
  std::string truth;
  std::string out;
  std::size_t folds = 5;
  int jobs = 1;
  HyperFlags hyper;
};

struct GridCell {
  std::string phase;  // "csigma" or "eta"
  double C = 0.0;
  double sigma = 0.0;
  double eta = 0.0;
  double cv_error = 0.0;
};

double cv_error_for(const GridArgs& args, const std::vector<tsg::Fold>& folds, double C,
                    double sigma, double eta) {
  double total = 0.0;
  for (const auto& fold : folds) {
    tsg::SemiDataset train_data = fold.train;
    std::vector<tsg::SparseVec> test_x = fold.test_x;
    if (!args.hyper.no_scale) {
      std::vector<tsg::SparseVec> all = train_data.labeled_x;
      all.insert(all.end(), train_data.unlabeled_x.begin(), train_data.unlabeled_x.end());
      const tsg::ScalerParams scaler = tsg::scale_fit(all, train_data.d);
      tsg::apply_scaling(scaler, train_data);
      test_x = tsg::scale_apply(scaler, test_x);
    }

    HyperFlags h = args.hyper;
    h.C = C;
    h.Cstar.reset();  // tied to C * n_l/n_u of the fold
    h.sigma = sigma;
    h.eta = eta;
    h.theta.reset();
    const tsg::TrainConfig cfg = build_config(h, train_data);
    const tsg::Model model = tsg::train(cfg, train_data);
    total += tsg::error_rate(tsg::Predictor(model).scores(test_x), fold.test_y);
  }
  return total / static_cast<double>(folds.size());
}

void run_gridsearch(const GridArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  LoadedPair loaded = load_semi(args.labeled, args.unlabeled);
  const std::vector<int> truth = read_label_file(args.truth);
  if (truth.size() != loaded.data.n_unlabeled())
    throw tsg::ShapeError("truth labels do not match the unlabeled pool size");

  tsg::SemiSplit split;
  split.data = loaded.data;
  split.hidden_labels = truth;
  const auto folds = tsg::kfold_unlabeled(split, args.folds,
                                          static_cast<std::uint64_t>(args.hyper.data_seed));

  // Phase 1: 7x7 grid over log10 C and log10 sigma at the flag eta.
  std::vector<std::pair<double, double>> cells;
  for (int lc = -3; lc <= 3; ++lc)
    for (int ls = -3; ls <= 3; ++ls)
      cells.emplace_back(std::pow(10.0, lc), std::pow(10.0, ls));

  std::vector<GridCell> rows(cells.size());
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
        const auto [C, sigma] = cells[i];
        rows[i] = {"csigma", C, sigma, args.hyper.eta,
                   cv_error_for(args, folds, C, sigma, args.hyper.eta)};
      }
    };
    const int jobs = std::max(1, args.jobs);
    std::vector<std::thread> threads;
    for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].cv_error < rows[best].cv_error) best = i;  // first win = smaller C, sigma

  // Phase 2: eta sweep at the winning (C, sigma).
  const double bestC = rows[best].C, bestSigma = rows[best].sigma;
  GridCell best_eta_cell{"eta", bestC, bestSigma, args.hyper.eta, rows[best].cv_error};
  bool have_eta = false;
  for (int le = 0; le <= 3; ++le) {
    const double eta = std::pow(10.0, le);
    GridCell cell{"eta", bestC, bestSigma, eta,
                  cv_error_for(args, folds, bestC, bestSigma, eta)};
    rows.push_back(cell);
    if (!have_eta || cell.cv_error < best_eta_cell.cv_error) {
      best_eta_cell = cell;
      have_eta = true;
    }
  }

  std::ostringstream csv;
  csv << "phase,C,sigma,eta,cv_error\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,%.12g\n", row.phase.c_str(), row.C,
                  row.sigma, row.eta, row.cv_error);
    csv << buf;
  }
  write_text_file(args.out, csv.str());

  json manifest = manifest_skeleton("gridsearch");
  manifest["labeled"] = args.labeled;
  manifest["unlabeled"] = args.unlabeled;
  manifest["labeled_digest"] = loaded.labeled_digest;
  manifest["unlabeled_digest"] = loaded.unlabeled_digest;
  manifest["folds"] = args.folds;
  manifest["rows"] = rows.size();
  manifest["best"] = {{"C", best_eta_cell.C},
                      {"sigma", best_eta_cell.sigma},
                      {"eta", best_eta_cell.eta},
                      {"cv_error", best_eta_cell.cv_error}};
  manifest["wall_seconds"] = seconds_since(t0);
  write_json_file(args.out + ".manifest.json", manifest);

  char line[160];
  std::snprintf(line, sizeof(line), "best C=%g sigma=%g eta=%g cv_error=%.4f\n",
                best_eta_cell.C, best_eta_cell.sigma, best_eta_cell.eta,
                best_eta_cell.cv_error);
  std::cout << line;
}

// ---------------------------------------------------------------- bench --

struct BenchArgs {
  std::string T_list = "64,128,256";
  std::int32_t m = 32;
  std::string n_list = "2000";
  std::int32_t d = 5;
  std::int64_t seed = 1;
  std::string out;
  HyperFlags hyper;
};

std::vector<std::int64_t> parse_int_list(const std::string& text, const char* flag) {
  std::vector<std::int64_t> out;
  std::stringstream list(text);
  std::string tok;
  while (std::getline(list, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoll(tok));
  }
  if (out.empty()) throw tsg::ConfigError(std::string("bench needs a nonempty ") + flag + " list");
  return out;
}

void run_bench(const BenchArgs& args) {
  const auto Ts = parse_int_list(args.T_list, "--T");
  const auto Ns = parse_int_list(args.n_list, "--n");

  std::ostringstream csv;
  csv << "kind,T,n,m,seconds\n";
  for (std::int64_t n : Ns) {
    const auto synth = tsg::make_two_gaussians(static_cast<std::size_t>(n), args.d, 2.0,
                                               static_cast<std::uint64_t>(args.seed));
    tsg::SemiDataset data;
    data.d = args.d;
    const std::size_t n_labeled = std::max<std::int64_t>(2, n / 10);
    for (std::size_t i = 0; i < synth.x.size(); ++i) {
      if (i < n_labeled) {
        data.labeled_x.push_back(synth.x[i]);
        data.labeled_y.push_back(synth.y[i]);
      } else {
        data.unlabeled_x.push_back(synth.x[i]);
      }
    }
    const std::vector<tsg::SparseVec> probes(
        data.unlabeled_x.begin(),
        data.unlabeled_x.begin() + std::min<std::size_t>(200, data.n_unlabeled()));

    for (std::int64_t T : Ts) {
      HyperFlags h = args.hyper;
      h.T = T;
      h.m = args.m;
      h.batch_labeled = std::min<std::int32_t>(h.batch_labeled, 8);
      h.batch_unlabeled = std::min<std::int32_t>(h.batch_unlabeled, 8);
      const tsg::TrainConfig cfg = build_config(h, data);

      const auto t0 = std::chrono::steady_clock::now();
      const tsg::Model model = tsg::train(cfg, data);
      const double train_s = seconds_since(t0);

      const auto t1 = std::chrono::steady_clock::now();
      tsg::Predictor predictor(model, false);
      volatile double sink = 0.0;
      for (const auto& x : probes) sink = sink + predictor.score(x);
      const double predict_s = seconds_since(t1);
      (void)sink;

      char buf[120];
      std::snprintf(buf, sizeof(buf), "train,%lld,%lld,%d,%.6f\n", static_cast<long long>(T),
                    static_cast<long long>(n), args.m, train_s);
      csv << buf;
      std::snprintf(buf, sizeof(buf), "predict,%lld,%zu,%d,%.6f\n", static_cast<long long>(T),
                    probes.size(), args.m, predict_s);
      csv << buf;
    }
  }
  if (args.out.empty() || args.out == "-")
    std::cout << csv.str();
  else
    write_text_file(args.out, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triply stochastic semi-supervised SVM trainer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TSG_VERSION_STRING);

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "carve a labeled/unlabeled split from a dataset");
  split->add_option("--data", split_args.data, "LIBSVM input")->required();
  split->add_option("--n-labeled", split_args.n_labeled, "labeled sample size");
  split->add_option("--seed", split_args.seed, "split seed");
  split->add_option("--out", split_args.out_dir, "output directory")->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a TSG semi-supervised SVM");
  train->add_option("--labeled", train_args.labeled, "labeled LIBSVM file")->required();
  train->add_option("--unlabeled", train_args.unlabeled, "unlabeled LIBSVM file")->required();
  train->add_option("--model", train_args.model, "output model path")->required();
  train->add_option("--manifest", train_args.manifest, "manifest path (default <model>.manifest.json)");
  train->add_option("--diagnose", train_args.diagnose,
                    "write <prefix>.csv/.json theorem diagnostics (desk scale)");
  train->add_option("--probes", train_args.probes, "probe count for the final gap estimate");
  train->add_option("--L", train_args.lipschitz_L,
                    "Lipschitz-gradient estimate enabling the full Theorem-2 bound");
  add_hyper_flags(train, train_args.hyper);

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "score a LIBSVM file with a trained model");
  predict->add_option("--model", predict_args.model, "model path")->required();
  predict->add_option("--data", predict_args.data, "LIBSVM input")->required();
  predict->add_option("--out", predict_args.out, "output path (default stdout)");
  predict->add_option("--scaler", predict_args.scaler, "scaler sidecar (default <model>.scaler.json)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "error rate of a model against labels");
  eval->add_option("--model", eval_args.model, "model path")->required();
  eval->add_option("--data", eval_args.data, "LIBSVM input")->required();
  eval->add_option("--truth", eval_args.truth, "label file overriding the LIBSVM labels");
  eval->add_option("--out", eval_args.out, "optional JSON report path");

  GridArgs grid_args;
  auto* grid = app.add_subcommand("gridsearch", "7x7 (C, sigma) grid + eta sweep with 5-fold unlabeled CV");
  grid->add_option("--labeled", grid_args.labeled, "labeled LIBSVM file")->required();
  grid->add_option("--unlabeled", grid_args.unlabeled, "unlabeled LIBSVM file")->required();
  grid->add_option("--truth", grid_args.truth, "hidden labels for the unlabeled pool")->required();
  grid->add_option("--out", grid_args.out, "grid CSV output")->required();
  grid->add_option("--folds", grid_args.folds, "fold count");
  grid->add_option("--jobs", grid_args.jobs, "concurrent cells");
  add_hyper_flags(grid, grid_args.hyper);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "wall-time scaling on synthetic data");
  bench->add_option("--T", bench_args.T_list, "comma-separated iteration counts");
  bench->add_option("--m", bench_args.m, "features per iteration");
  bench->add_option("--n", bench_args.n_list, "comma-separated synthetic dataset sizes");
  bench->add_option("--d", bench_args.d, "synthetic dimension");
  bench->add_option("--seed", bench_args.seed, "synthetic data seed");
  bench->add_option("--out", bench_args.out, "CSV output path (default stdout)");
  bench->add_option("--C", bench_args.hyper.C, "labeled regularization weight");
  bench->add_option("--Cstar", bench_args.hyper.Cstar, "unlabeled weight");
  bench->add_option("--sigma", bench_args.hyper.sigma, "RBF kernel parameter");
  bench->add_option("--eta", bench_args.hyper.eta, "constant step size gamma = 1/eta");
  bench->add_option("--batch-labeled", bench_args.hyper.batch_labeled, "labeled batch size");
  bench->add_option("--batch-unlabeled", bench_args.hyper.batch_unlabeled,
                    "unlabeled batch size");
  bench->add_option("--loss", bench_args.hyper.loss, "unlabeled loss");
  bench->add_option("--data-seed", bench_args.hyper.data_seed, "instance sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (split->parsed()) run_split(split_args);
    if (train->parsed()) run_train(train_args);
    if (predict->parsed()) run_predict(predict_args);
    if (eval->parsed()) run_eval(eval_args);
    if (grid->parsed()) run_gridsearch(grid_args);
    if (bench->parsed()) run_bench(bench_args);
  } catch (const tsg::ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return kParse;
  } catch (const tsg::FormatError& e) {
    std::cerr << "error: format: " << e.what() << "\n";
    return kParse;
  } catch (const tsg::DivergenceError& e) {
    std::cerr << "error: divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const tsg::ResourceError& e) {
    std::cerr << "error: resource: " << e.what() << "\n";
    return kResource;
  } catch (const tsg::ShapeError& e) {
    std::cerr << "error: shape: " << e.what() << "\n";
    return kConfig;
  } catch (const tsg::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
