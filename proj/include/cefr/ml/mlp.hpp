#pragma once

#include "cefr/ml/classifier.hpp"

namespace cefr::ml {

struct MlpOptions {
  int hidden = 100;
  double learning_rate = 1e-3;
  double alpha = 1e-4;  // L2 penalty
  int max_epochs = 2000;
  int batch_size = 200;
  /// Training stops once the epoch loss has failed to improve on the best
  /// loss by more than tol for more than `patience` consecutive epochs.
  double tol = 1e-6;
  int patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One hidden layer of rectified units with a softmax output, trained by
/// Adam on mini-batches with Glorot-uniform initialisation.
class Mlp final : public Classifier {
 public:
  explicit Mlp(std::uint64_t seed, MlpOptions options = {}) : seed_(seed), options_(options) {}

  ClassifierKind kind() const override { return ClassifierKind::kMlp; }
  void fit(const Matrix& x, const Labels& y, int n_classes) override;
  Matrix scores(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Mlp> from_json(const nlohmann::json& j);

  struct Params {
    Matrix w1;  // d x hidden
    Vector b1;
    Matrix w2;  // hidden x classes
    Vector b2;

    Vector pack() const;
    static Params unpack(const Vector& theta, Eigen::Index d, Eigen::Index hidden, Eigen::Index classes);
  };

  /// Mean cross-entropy over the rows plus alpha ||W||^2 / (2 n), with the
  /// backpropagated gradient in Params::pack() order.
  static double loss(const Params& p, const Matrix& x, const Labels& y, double alpha, Vector* grad);

  static Params initialise(Eigen::Index d, Eigen::Index hidden, Eigen::Index classes, std::uint64_t seed);

  const Params& params() const { return params_; }
  int epochs() const { return epochs_; }
  const std::vector<double>& loss_curve() const { return loss_curve_; }

 private:
  std::uint64_t seed_;
  MlpOptions options_;
  Params params_;
  int epochs_ = 0;
  std::vector<double> loss_curve_;
};

}  // namespace cefr::ml
