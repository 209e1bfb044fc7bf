#include "tsg/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "tsg/errors.hpp"

namespace tsg {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'G', '1'};
constexpr std::uint32_t kFormatVersion = 1;

// Explicit little-endian scalar I/O so the container is byte-stable across
// hosts.
template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_integral_v<T>);
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
  if (!in) throw FormatError("model file truncated");
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

std::uint8_t loss_tag(UnlabeledLossKind kind) {
  switch (kind) {
    case UnlabeledLossKind::SHG: return 0;
    case UnlabeledLossKind::SSHG: return 1;
    case UnlabeledLossKind::Ramp: return 2;
    case UnlabeledLossKind::DA: return 3;
  }
  throw FormatError("unencodable loss kind");
}

UnlabeledLossKind loss_from_tag(std::uint8_t tag) {
  switch (tag) {
    case 0: return UnlabeledLossKind::SHG;
    case 1: return UnlabeledLossKind::SSHG;
    case 2: return UnlabeledLossKind::Ramp;
    case 3: return UnlabeledLossKind::DA;
  }
  throw FormatError("unknown loss tag " + std::to_string(tag));
}

}  // namespace

void validate(const Model& model) {
  if (model.m < 1 && !model.coefficients.empty())
    throw ConfigError("model has coefficients but m < 1");
  if (model.d < 0) throw ConfigError("model dimension must be nonnegative");
  for (std::size_t i = 0; i < model.coefficients.size(); ++i) {
    const Vector& a = model.coefficients[i];
    if (a.size() != model.m)
      throw ShapeError("coefficient " + std::to_string(i) + " has length " +
                       std::to_string(a.size()) + ", expected m = " + std::to_string(model.m));
    if (!a.allFinite())
      throw DivergenceError("non-finite coefficient", static_cast<std::int64_t>(i) + 1);
  }
}

namespace {

template <typename X>
double score_impl(const Model& model, const X& x) {
  double f = 0.0;
  const KernelSpec spec = model.kernel();
  for (std::int64_t i = 0; i < model.iterations(); ++i) {
    FeatureBlock block = spawn_feature_block(static_cast<std::uint64_t>(model.base_seed),
                                             static_cast<std::uint64_t>(i) + 1, model.m,
                                             model.d, spec);
    f += model.coefficients[static_cast<std::size_t>(i)].dot(feature_vector(block, x));
  }
  return f;
}

}  // namespace

double predict_score(const Model& model, const SparseVec& x) {
  if (x.min_dim() > model.d)
    throw ShapeError("input index " + std::to_string(x.min_dim() - 1) +
                     " out of range for model dimension " + std::to_string(model.d));
  return score_impl(model, x);
}

double predict_score(const Model& model, const Vector& x) {
  if (x.size() != model.d)
    throw ShapeError("input has dimension " + std::to_string(x.size()) +
                     ", model expects " + std::to_string(model.d));
  return score_impl(model, x);
}

int predict_label(const Model& model, const SparseVec& x) {
  return label_of(predict_score(model, x));
}

void save(const Model& model, std::ostream& out) {
  validate(model);
  out.write(kMagic, 4);
  put_le(out, kFormatVersion);
  put_le(out, static_cast<std::uint32_t>(model.d));
  put_le(out, static_cast<std::uint32_t>(model.m));
  put_le(out, static_cast<std::uint64_t>(model.coefficients.size()));
  put_f64(out, model.sigma);
  put_le(out, model.base_seed);
  out.put(static_cast<char>(loss_tag(model.loss.kind)));
  put_f64(out, model.loss.ramp_s);
  out.put(model.loss.table_fidelity ? 1 : 0);
  for (const Vector& a : model.coefficients)
    for (std::int64_t j = 0; j < a.size(); ++j) put_f64(out, a[j]);
  if (!out) throw FormatError("model write failed");
}

void save(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open model file for writing: " + path);
  save(model, out);
}

Model load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad model magic (not a TSG1 file)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version));

  Model model;
  model.d = static_cast<std::int32_t>(get_le<std::uint32_t>(in));
  model.m = static_cast<std::int32_t>(get_le<std::uint32_t>(in));
  const auto T = get_le<std::uint64_t>(in);
  model.sigma = get_f64(in);
  model.base_seed = get_le<std::int64_t>(in);
  const int tag = in.get();
  if (tag < 0) throw FormatError("model file truncated");
  model.loss.kind = loss_from_tag(static_cast<std::uint8_t>(tag));
  model.loss.ramp_s = get_f64(in);
  const int fidelity = in.get();
  if (fidelity < 0) throw FormatError("model file truncated");
  model.loss.table_fidelity = fidelity != 0;

  model.coefficients.resize(T);
  for (auto& a : model.coefficients) {
    a.resize(model.m);
    for (std::int32_t j = 0; j < model.m; ++j) a[j] = get_f64(in);
  }
  validate(model);
  return model;
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file: " + path);
  return load(in);
}

Predictor::Predictor(const Model& model, bool cache_blocks)
    : model_(model), cache_(cache_blocks) {}

const FeatureBlock& Predictor::block(std::int64_t i) const {
  if (cache_) {
    auto it = cache_store_.find(i);
    if (it != cache_store_.end()) return it->second;
    auto [pos, _] = cache_store_.emplace(
        i, spawn_feature_block(static_cast<std::uint64_t>(model_.base_seed),
                               static_cast<std::uint64_t>(i) + 1, model_.m, model_.d,
                               model_.kernel()));
    return pos->second;
  }
  scratch_ = spawn_feature_block(static_cast<std::uint64_t>(model_.base_seed),
                                 static_cast<std::uint64_t>(i) + 1, model_.m, model_.d,
                                 model_.kernel());
  return scratch_;
}

double Predictor::score(const SparseVec& x) const {
  if (x.min_dim() > model_.d)
    throw ShapeError("input index " + std::to_string(x.min_dim() - 1) +
                     " out of range for model dimension " + std::to_string(model_.d));
  double f = 0.0;
  for (std::int64_t i = 0; i < model_.iterations(); ++i)
    f += model_.coefficients[static_cast<std::size_t>(i)].dot(feature_vector(block(i), x));
  return f;
}

std::vector<double> Predictor::scores(const std::vector<SparseVec>& xs) const {
  std::vector<double> out(xs.size(), 0.0);
  // Block-major accumulation: one spawn per iteration for the whole batch.
  for (std::int64_t i = 0; i < model_.iterations(); ++i) {
    const FeatureBlock& b = block(i);
    const Vector& a = model_.coefficients[static_cast<std::size_t>(i)];
    for (std::size_t p = 0; p < xs.size(); ++p) out[p] += a.dot(feature_vector(b, xs[p]));
  }
  return out;
}

}  // namespace tsg
