#pragma once

#include <array>

#include "cefr/ml/classifier.hpp"

namespace cefr::ml {

/// Multinomial logistic regression minimising
///   sum_i CE(softmax(W x_i + b), y_i) + ||W||^2 / (2 C)
/// with an unpenalised intercept.
class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(double c = 1.0, double tol = 1e-6) : c_(c), tol_(tol) {}

  ClassifierKind kind() const override { return ClassifierKind::kLr; }
  void fit(const Matrix& x, const Labels& y, int n_classes) override;
  Matrix scores(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<LogisticRegression> from_json(const nlohmann::json& j);

  /// Objective and its gradient at packed parameters theta = [vec(W); b],
  /// W stored column-major as n_classes x d.
  static double objective(const Matrix& x, const Labels& y, int n_classes, double c, const Vector& theta,
                          Vector* grad);

  double c() const { return c_; }
  const Matrix& weights() const { return w_; }
  const Vector& intercept() const { return b_; }
  /// Max-norm of the objective gradient at the fitted parameters.
  double final_gradient_norm() const { return grad_norm_; }
  int iterations() const { return iterations_; }

 private:
  double c_;
  double tol_;
  Matrix w_;
  Vector b_;
  double grad_norm_ = 0.0;
  int iterations_ = 0;
};

/// Logistic regression whose strength is chosen by stratified 5-fold
/// accuracy over 10 log-spaced C values in [1e-4, 1e4], then refit.
class LogisticRegressionCV final : public Classifier {
 public:
  explicit LogisticRegressionCV(std::uint64_t seed) : seed_(seed) {}

  ClassifierKind kind() const override { return ClassifierKind::kLrCv; }
  void fit(const Matrix& x, const Labels& y, int n_classes) override;
  Matrix scores(const Matrix& x) const override { return model_.scores(x); }
  nlohmann::json to_json() const override;
  static std::unique_ptr<LogisticRegressionCV> from_json(const nlohmann::json& j);

  static std::array<double, 10> grid();
  double chosen_c() const { return model_.c(); }

 private:
  std::uint64_t seed_;
  LogisticRegression model_;
  std::vector<double> cv_scores_;
};

/// Linear discriminant analysis with pooled covariance plus a 1e-6 ridge.
class LinearDiscriminant final : public Classifier {
 public:
  ClassifierKind kind() const override { return ClassifierKind::kLda; }
  void fit(const Matrix& x, const Labels& y, int n_classes) override;
  Matrix scores(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<LinearDiscriminant> from_json(const nlohmann::json& j);

  const Matrix& coef() const { return coef_; }
  const Vector& intercept() const { return intercept_; }

 private:
  Matrix coef_;       // n_classes x d
  Vector intercept_;  // -inf for classes absent from training
};

/// Quadratic discriminant analysis with per-class covariance plus a 1e-6 ridge.
class QuadraticDiscriminant final : public Classifier {
 public:
  ClassifierKind kind() const override { return ClassifierKind::kQda; }
  void fit(const Matrix& x, const Labels& y, int n_classes) override;
  Matrix scores(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<QuadraticDiscriminant> from_json(const nlohmann::json& j);

 private:
  void prepare();

  std::vector<Vector> means_;
  std::vector<Matrix> covs_;
  std::vector<double> log_priors_;
  std::vector<Matrix> chol_;  // lower Cholesky factors of covs_
  std::vector<double> log_dets_;
};

inline constexpr double kDiscriminantJitter = 1e-6;

}  // namespace cefr::ml
