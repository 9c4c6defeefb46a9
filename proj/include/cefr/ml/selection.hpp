#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "cefr/ml/classifier.hpp"

namespace cefr::ml {

/// Column standardisation (x - mean) / sd with the population SD of the
/// fitting rows. Constant columns pass through unchanged and are flagged.
struct Scaler {
  Vector mean;
  Vector scale;
  std::vector<bool> constant;

  static Scaler fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  bool any_constant() const;
  /// Scaler restricted to the given columns, in that order.
  Scaler subset(const std::vector<std::size_t>& cols) const;

  nlohmann::json to_json() const;
  static Scaler from_json(const nlohmann::json& j);
};

/// Classic equal-variance one-way ANOVA F of each column across the label
/// groups. Columns with zero total variance score 0; columns whose groups are
/// internally constant but differ score +inf.
std::vector<double> anova_f_scores(const Matrix& x, const Labels& y, int n_classes);

/// Indices of the k highest-scoring columns in descending score order, ties
/// by column order. Throws ConfigError unless 1 <= k <= cols.
std::vector<std::size_t> select_univariate(const Matrix& x, const Labels& y, int n_classes, std::size_t k);

struct SequentialTrace {
  std::vector<std::size_t> accepted;  // in order of acceptance
  std::vector<double> scores;         // CV accuracy after each acceptance
};

/// Greedy forward selection scored by 5-fold stratified CV accuracy of the
/// given classifier. With k > 0 exactly k columns are chosen. With k = 0 the
/// search stops once three consecutive additions fail to beat the best score
/// and returns the prefix that achieved it; an exhausted pool returns every
/// accepted column. Ties go to the lower column index.
std::vector<std::size_t> select_sequential(const Matrix& x, const Labels& y, int n_classes, ClassifierKind kind,
                                           std::uint64_t seed, std::size_t k = 0, SequentialTrace* trace = nullptr);

inline constexpr std::size_t kSequentialFolds = 5;
inline constexpr int kSequentialPatience = 3;

}  // namespace cefr::ml
