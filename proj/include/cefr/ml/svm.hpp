#pragma once

#include "cefr/ml/classifier.hpp"

namespace cefr::ml {

struct SvmOptions {
  double c = 1.0;
  /// <= 0 selects 1 / (d * variance of all training entries).
  double gamma = 0.0;
  double tol = 1e-3;
  long max_iter = 10'000'000;
};

/// Binary soft-margin problem solved by SMO with second-order working-set
/// selection. Labels are +1 / -1; the result is f(x) = sum coef_i K(x_i, x) - rho.
struct BinarySvmSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  long iterations = 0;
};
BinarySvmSolution solve_binary_svm(const Matrix& kernel, const std::vector<int>& y, double c, double tol,
                                   long max_iter);

/// RBF-kernel support vector classifier with one-vs-one voting; vote ties
/// are broken by the summed decision values.
class Svm final : public Classifier {
 public:
  explicit Svm(SvmOptions options = {}) : options_(options) {}

  ClassifierKind kind() const override { return ClassifierKind::kSvm; }
  void fit(const Matrix& x, const Labels& y, int n_classes) override;
  Matrix scores(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Svm> from_json(const nlohmann::json& j);

  /// Pairwise decision values, one column per pair (i < j); positive favours i.
  Matrix decision_values(const Matrix& x) const;
  double gamma() const { return gamma_; }

  struct PairModel {
    int first = 0;
    int second = 1;
    std::vector<int> support;  // rows of support_vectors_
    std::vector<double> coef;  // alpha_i * y_i
    double rho = 0.0;
  };

 private:
  SvmOptions options_;
  int n_classes_ = 0;
  double gamma_ = 0.0;
  Matrix support_vectors_;
  std::vector<PairModel> pairs_;
};

}  // namespace cefr::ml
