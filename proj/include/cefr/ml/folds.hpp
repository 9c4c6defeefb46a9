#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cefr/ml/classifier.hpp"

namespace cefr::ml {

/// Held-out row indices for each of k stratified folds. Each class is
/// shuffled with a seeded stream and dealt round-robin, so every fold holds
/// floor or ceil of n_c / k rows of class c. Throws DataError when a class
/// that occurs at all has fewer than k rows.
std::vector<std::vector<std::size_t>> stratified_folds(const Labels& y, int n_classes, std::size_t k,
                                                       std::uint64_t seed);

/// Complement of a fold within [0, n).
std::vector<std::size_t> complement(const std::vector<std::size_t>& fold, std::size_t n);

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& idx);
Labels take(const Labels& y, const std::vector<std::size_t>& idx);
Matrix take_cols(const Matrix& x, const std::vector<std::size_t>& cols);

double accuracy(const Labels& truth, const Labels& pred);

/// Mean held-out accuracy of a fresh classifier over stratified folds.
double cv_accuracy(ClassifierKind kind, std::uint64_t seed, const Matrix& x, const Labels& y, int n_classes,
                   std::size_t folds, std::uint64_t fold_seed);

}  // namespace cefr::ml
