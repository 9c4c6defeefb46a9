#pragma once

#include "cefr/ml/classifier.hpp"

namespace cefr::ml {

struct ForestOptions {
  int trees = 100;
  /// 0 = floor(sqrt(d)), at least 1.
  int max_features = 0;
  bool bootstrap = true;
};

/// Random forest of unpruned Gini trees; scores are the mean of the
/// per-tree leaf class frequencies.
class RandomForest final : public Classifier {
 public:
  explicit RandomForest(std::uint64_t seed, ForestOptions options = {}) : seed_(seed), options_(options) {}

  ClassifierKind kind() const override { return ClassifierKind::kRf; }
  void fit(const Matrix& x, const Labels& y, int n_classes) override;
  Matrix scores(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<RandomForest> from_json(const nlohmann::json& j);

  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;  // class frequencies at leaves
  };
  using Tree = std::vector<Node>;

  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::uint64_t seed_;
  ForestOptions options_;
  int n_classes_ = 0;
  int n_features_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace cefr::ml
