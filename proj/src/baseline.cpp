#include "tsg/baseline.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "tsg/errors.hpp"

namespace tsg {

namespace {

void validate(const BaselineConfig& cfg) {
  if (!(cfg.C > 0.0)) throw ConfigError("C must be positive");
  if (cfg.C_star < 0.0) throw ConfigError("C* must be nonnegative");
  if (!(cfg.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (cfg.m_total < 1) throw ConfigError("m_total must be >= 1");
  if (cfg.passes < 1) throw ConfigError("passes must be >= 1");
  if (cfg.batch_labeled < 1 || cfg.batch_unlabeled < 1)
    throw ConfigError("batch sizes must be >= 1");
  validate(cfg.loss);
}

}  // namespace

LinearRFModel train_frs3vm(const BaselineConfig& cfg, const SemiDataset& data) {
  validate(cfg);
  if (data.n_labeled() == 0) throw ConfigError("training needs at least one labeled instance");
  if (data.n_unlabeled() == 0) throw ConfigError("training needs at least one unlabeled instance");

  LinearRFModel model;
  model.base_seed = cfg.base_seed;
  model.m_total = cfg.m_total;
  model.d = std::max<std::int32_t>(1, data.d);
  model.sigma = cfg.sigma;
  model.loss = cfg.loss;
  model.w = Vector::Zero(cfg.m_total);

  const FeatureBlock block = model.block();
  const std::int64_t iters =
      one_pass_iterations(data.n_unlabeled(), cfg.batch_unlabeled, cfg.passes);

  for (std::int64_t i = 1; i <= iters; ++i) {
    const double gamma = step_size(cfg.schedule, i, iters);
    const auto li =
        sample_batch(cfg.data_seed, i, Pool::Labeled, cfg.batch_labeled, data.n_labeled());
    const auto ui =
        sample_batch(cfg.data_seed, i, Pool::Unlabeled, cfg.batch_unlabeled, data.n_unlabeled());

    std::vector<double> sl(li.size()), su(ui.size());
    std::vector<int> y(li.size());
    std::vector<Vector> phi_l(li.size()), phi_u(ui.size());
    for (std::size_t p = 0; p < li.size(); ++p) {
      phi_l[p] = feature_vector(block, data.labeled_x[li[p]]);
      sl[p] = model.w.dot(phi_l[p]);
      y[p] = data.labeled_y[li[p]];
    }
    for (std::size_t p = 0; p < ui.size(); ++p) {
      phi_u[p] = feature_vector(block, data.unlabeled_x[ui[p]]);
      su[p] = model.w.dot(phi_u[p]);
    }

    const LossWeights lw = loss_weights(sl, y, su, cfg.C, cfg.C_star, cfg.loss);
    Vector g = Vector::Zero(cfg.m_total);
    for (std::size_t p = 0; p < li.size(); ++p)
      if (lw.labeled[p] != 0.0) g += lw.labeled[p] * phi_l[p];
    for (std::size_t p = 0; p < ui.size(); ++p)
      if (lw.unlabeled[p] != 0.0) g += lw.unlabeled[p] * phi_u[p];

    model.w = (1.0 - gamma) * model.w - gamma * g;
    if (!model.w.allFinite()) throw DivergenceError("non-finite baseline weights", i);
  }
  return model;
}

double predict_linear(const LinearRFModel& model, const SparseVec& x) {
  if (x.min_dim() > model.d)
    throw ShapeError("input index " + std::to_string(x.min_dim() - 1) +
                     " out of range for model dimension " + std::to_string(model.d));
  return model.w.dot(feature_vector(model.block(), x));
}

std::vector<double> predict_linear(const LinearRFModel& model, const std::vector<SparseVec>& xs) {
  const FeatureBlock block = model.block();
  std::vector<double> out(xs.size());
  for (std::size_t p = 0; p < xs.size(); ++p) out[p] = model.w.dot(feature_vector(block, xs[p]));
  return out;
}

namespace {

constexpr char kFrsMagic[4] = {'F', 'R', 'S', '1'};
constexpr std::uint32_t kFrsVersion = 1;

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_le(out, bits);
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw FormatError("baseline model file truncated");
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(buf[i]) << (8 * i);
  return static_cast<T>(u);
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_le<std::uint64_t>(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save(const LinearRFModel& model, std::ostream& out) {
  out.write(kFrsMagic, 4);
  put_le(out, kFrsVersion);
  put_le(out, static_cast<std::uint32_t>(model.d));
  put_le(out, static_cast<std::uint32_t>(model.m_total));
  put_f64(out, model.sigma);
  put_le(out, model.base_seed);
  out.put(static_cast<char>(model.loss.kind));
  put_f64(out, model.loss.ramp_s);
  out.put(model.loss.table_fidelity ? 1 : 0);
  for (std::int64_t j = 0; j < model.w.size(); ++j) put_f64(out, model.w[j]);
  if (!out) throw FormatError("baseline model write failed");
}

void save_frs(const LinearRFModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open model file for writing: " + path);
  save(model, out);
}

LinearRFModel load_frs(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFrsMagic, 4) != 0)
    throw FormatError("bad baseline model magic (not an FRS1 file)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kFrsVersion)
    throw FormatError("unsupported baseline format version " + std::to_string(version));
  LinearRFModel model;
  model.d = static_cast<std::int32_t>(get_le<std::uint32_t>(in));
  model.m_total = static_cast<std::int32_t>(get_le<std::uint32_t>(in));
  model.sigma = get_f64(in);
  model.base_seed = get_le<std::int64_t>(in);
  const int tag = in.get();
  if (tag < 0 || tag > 3) throw FormatError("bad loss tag in baseline model");
  model.loss.kind = static_cast<UnlabeledLossKind>(tag);
  model.loss.ramp_s = get_f64(in);
  const int fidelity = in.get();
  if (fidelity < 0) throw FormatError("baseline model file truncated");
  model.loss.table_fidelity = fidelity != 0;
  model.w.resize(model.m_total);
  for (std::int32_t j = 0; j < model.m_total; ++j) model.w[j] = get_f64(in);
  if (!model.w.allFinite()) throw FormatError("non-finite baseline weights");
  return model;
}

LinearRFModel load_frs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file: " + path);
  return load_frs(in);
}

}  // namespace tsg
