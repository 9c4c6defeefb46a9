#include "cefr/ml/folds.hpp"

#include <algorithm>
#include <numeric>
#include <span>
#include <string>

#include "cefr/error.hpp"
#include "cefr/random.hpp"

namespace cefr::ml {

std::vector<std::vector<std::size_t>> stratified_folds(const Labels& y, int n_classes, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < y.size(); ++i) by_class.at(static_cast<std::size_t>(y[i])).push_back(i);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < k) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                      " rows, fewer than the " + std::to_string(k) + " folds required");
    }
    Rng rng(derive_seed(seed, c));
    rng.shuffle(std::span<std::size_t>(members));
    // Rotating the starting fold per class keeps fold sizes balanced overall.
    for (std::size_t i = 0; i < members.size(); ++i) folds[(offset + i) % k].push_back(members[i]);
    offset = (offset + members.size()) % k;
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& fold, std::size_t n) {
  std::vector<char> held(n, 0);
  for (std::size_t i : fold) held[i] = 1;
  std::vector<std::size_t> out;
  out.reserve(n - fold.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) out.push_back(i);
  }
  return out;
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Labels take(const Labels& y, const std::vector<std::size_t>& idx) {
  Labels out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(y[i]);
  return out;
}

Matrix take_cols(const Matrix& x, const std::vector<std::size_t>& cols) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

double accuracy(const Labels& truth, const Labels& pred) {
  if (truth.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double cv_accuracy(ClassifierKind kind, std::uint64_t seed, const Matrix& x, const Labels& y, int n_classes,
                   std::size_t folds, std::uint64_t fold_seed) {
  const auto parts = stratified_folds(y, n_classes, folds, fold_seed);
  double total = 0.0;
  for (const auto& test : parts) {
    const auto train = complement(test, y.size());
    auto model = make_classifier(kind, seed);
    model->fit(take_rows(x, train), take(y, train), n_classes);
    total += accuracy(take(y, test), model->predict(take_rows(x, test)));
  }
  return total / static_cast<double>(parts.size());
}

}  // namespace cefr::ml
