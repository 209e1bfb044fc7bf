#include "tsg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "tsg/errors.hpp"
#include "tsg/rng.hpp"

namespace tsg {

namespace {

bool parse_double(const std::string& tok, double& out) {
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size() && !tok.empty();
}

bool parse_int(const std::string& tok, long& out) {
  char* end = nullptr;
  out = std::strtol(tok.c_str(), &end, 10);
  return end == tok.c_str() + tok.size() && !tok.empty();
}

// Fisher-Yates with a seeded stream; deterministic across runs.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t key) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RngStream stream(key);
  for (std::size_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[stream.next_index(static_cast<std::uint32_t>(i))]);
  return idx;
}

}  // namespace

ParsedData parse_libsvm(std::istream& in) {
  ParsedData out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip trailing CR and comments.
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    double label;
    if (!parse_double(tok, label))
      throw ParseError("non-numeric label \"" + tok + "\"", lineno);

    SparseVec v;
    long prev = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("expected <index>:<value>, got \"" + tok + "\"", lineno);
      long index;
      double value;
      if (!parse_int(tok.substr(0, colon), index))
        throw ParseError("non-numeric feature index in \"" + tok + "\"", lineno);
      if (!parse_double(tok.substr(colon + 1), value))
        throw ParseError("non-numeric feature value in \"" + tok + "\"", lineno);
      if (index < 1) throw ParseError("feature index must be >= 1, got " + std::to_string(index), lineno);
      if (index <= prev)
        throw ParseError("feature indices must be strictly increasing (" +
                             std::to_string(prev) + " then " + std::to_string(index) + ")",
                         lineno);
      prev = index;
      v.idx.push_back(static_cast<std::int32_t>(index - 1));
      v.val.push_back(value);
      out.d = std::max(out.d, static_cast<std::int32_t>(index));
    }
    out.x.push_back(std::move(v));
    out.raw_labels.push_back(label);
  }
  return out;
}

ParsedData parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open data file: " + path);
  return parse_libsvm(in);
}

void write_libsvm(std::ostream& out, const std::vector<SparseVec>& x,
                  const std::vector<double>& labels) {
  char buf[64];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", labels[i]);
    out << buf;
    for (std::size_t k = 0; k < x[i].idx.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[i].val[k]);
      out << ' ' << (x[i].idx[k] + 1) << ':' << buf;
    }
    out << '\n';
  }
}

std::vector<int> map_labels(const std::vector<double>& raw) {
  std::set<double> alphabet(raw.begin(), raw.end());
  auto is = [&](double a, double b) {
    return alphabet == std::set<double>{a, b};
  };
  double neg, pos;
  if (is(-1, 1)) neg = -1, pos = 1;
  else if (is(0, 1)) neg = 0, pos = 1;
  else if (is(1, 2)) neg = 1, pos = 2;
  else if (alphabet.size() == 1 &&
           (*alphabet.begin() == -1 || *alphabet.begin() == 1)) {
    // Degenerate single-class input keeps its sign.
    neg = -1, pos = 1;
  } else {
    std::string got;
    for (double a : alphabet) got += (got.empty() ? "" : ", ") + std::to_string(a);
    throw ConfigError("unsupported label alphabet {" + got +
                      "}; expected {-1,+1}, {0,1} or {1,2}");
  }
  std::vector<int> y(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) y[i] = raw[i] == pos ? 1 : (raw[i] == neg ? -1 : 0);
  return y;
}

SemiSplit make_semi_split(const std::vector<SparseVec>& x, const std::vector<int>& y,
                          std::size_t n_labeled, std::uint64_t seed) {
  const std::size_t n = x.size();
  if (y.size() != n) throw ShapeError("labels and vectors disagree in length");
  if (n_labeled > n)
    throw ConfigError("n_labeled = " + std::to_string(n_labeled) + " exceeds dataset size " +
                      std::to_string(n));
  if (n_labeled == 0) throw ConfigError("n_labeled must be >= 1");

  constexpr int kMaxRetries = 64;
  std::vector<std::size_t> order;
  bool both_classes = false;
  for (int attempt = 0; attempt < kMaxRetries && !both_classes; ++attempt) {
    order = shuffled_indices(n, CounterRng::derive_key(seed, static_cast<std::uint64_t>(attempt)));
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n_labeled; ++i) {
      if (y[order[i]] > 0) pos = true;
      else neg = true;
    }
    both_classes = (pos && neg) || n_labeled == n;
  }
  if (!both_classes)
    throw ConfigError("could not sample a labeled set containing both classes after " +
                      std::to_string(kMaxRetries) + " attempts");

  SemiSplit split;
  split.seed = seed;
  std::int32_t d = 0;
  for (const auto& v : x) d = std::max(d, v.min_dim());
  split.data.d = d;

  split.labeled_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_labeled));
  split.unlabeled_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_labeled), order.end());
  std::sort(split.labeled_idx.begin(), split.labeled_idx.end());
  std::sort(split.unlabeled_idx.begin(), split.unlabeled_idx.end());

  for (std::size_t i : split.labeled_idx) {
    split.data.labeled_x.push_back(x[i]);
    split.data.labeled_y.push_back(y[i]);
  }
  for (std::size_t i : split.unlabeled_idx) {
    split.data.unlabeled_x.push_back(x[i]);
    split.hidden_labels.push_back(y[i]);
  }
  return split;
}

std::vector<Fold> kfold_unlabeled(const SemiSplit& split, std::size_t k, std::uint64_t seed) {
  const std::size_t nu = split.data.n_unlabeled();
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (nu < k)
    throw ConfigError("unlabeled pool of size " + std::to_string(nu) +
                      " cannot be split into " + std::to_string(k) + " folds");

  auto order = shuffled_indices(nu, CounterRng::derive_key(seed, 0xF01Dull));
  // Even partition: first (nu % k) folds get one extra element.
  std::vector<std::vector<std::size_t>> subsets(k);
  const std::size_t base = nu / k, extra = nu % k;
  std::size_t at = 0;
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t take = base + (j < extra ? 1 : 0);
    for (std::size_t t = 0; t < take; ++t) subsets[j].push_back(order[at++]);
    std::sort(subsets[j].begin(), subsets[j].end());
  }

  std::vector<Fold> folds(k);
  for (std::size_t j = 0; j < k; ++j) {
    Fold& fold = folds[j];
    fold.train.labeled_x = split.data.labeled_x;
    fold.train.labeled_y = split.data.labeled_y;
    fold.train.d = split.data.d;
    for (std::size_t i : subsets[j]) fold.train.unlabeled_x.push_back(split.data.unlabeled_x[i]);
    for (std::size_t jj = 0; jj < k; ++jj) {
      if (jj == j) continue;
      for (std::size_t i : subsets[jj]) {
        fold.test_x.push_back(split.data.unlabeled_x[i]);
        fold.test_y.push_back(split.hidden_labels[i]);
      }
    }
  }
  return folds;
}

ScalerParams scale_fit(const std::vector<SparseVec>& x, std::int32_t d) {
  ScalerParams p;
  p.min.assign(static_cast<std::size_t>(d), 0.0);
  p.max.assign(static_cast<std::size_t>(d), 0.0);
  std::vector<std::size_t> seen(static_cast<std::size_t>(d), 0);
  for (const auto& v : x) {
    for (std::size_t k = 0; k < v.idx.size(); ++k) {
      const auto j = static_cast<std::size_t>(v.idx[k]);
      if (++seen[j] == 1) {
        p.min[j] = v.val[k];
        p.max[j] = v.val[k];
      } else {
        p.min[j] = std::min(p.min[j], v.val[k]);
        p.max[j] = std::max(p.max[j], v.val[k]);
      }
    }
  }
  // Implicit zeros: any vector missing dimension j contributes value 0.
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (seen[j] < x.size()) {
      if (seen[j] == 0) p.min[j] = p.max[j] = 0.0;
      else {
        p.min[j] = std::min(p.min[j], 0.0);
        p.max[j] = std::max(p.max[j], 0.0);
      }
    }
  }
  return p;
}

SparseVec scale_apply(const ScalerParams& params, const SparseVec& x) {
  if (x.min_dim() > params.d())
    throw ShapeError("scale_apply: input index " + std::to_string(x.min_dim() - 1) +
                     " out of range for scaler dimension " + std::to_string(params.d()));
  SparseVec out;
  std::size_t k = 0;
  for (std::int32_t j = 0; j < params.d(); ++j) {
    double raw = 0.0;
    if (k < x.idx.size() && x.idx[k] == j) raw = x.val[k++];
    const double range = params.max[static_cast<std::size_t>(j)] - params.min[static_cast<std::size_t>(j)];
    // Degenerate dimensions collapse to 0; out-of-range values extrapolate.
    const double scaled = range == 0.0 ? 0.0 : (raw - params.min[static_cast<std::size_t>(j)]) / range;
    if (scaled != 0.0) {
      out.idx.push_back(j);
      out.val.push_back(scaled);
    }
  }
  return out;
}

std::vector<SparseVec> scale_apply(const ScalerParams& params, const std::vector<SparseVec>& x) {
  std::vector<SparseVec> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(scale_apply(params, v));
  return out;
}

void apply_scaling(const ScalerParams& params, SemiDataset& data) {
  data.labeled_x = scale_apply(params, data.labeled_x);
  data.unlabeled_x = scale_apply(params, data.unlabeled_x);
  data.d = std::max(data.d, params.d());
}

}  // namespace tsg
