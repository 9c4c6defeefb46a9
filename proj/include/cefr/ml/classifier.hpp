#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace cefr::ml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

enum class ClassifierKind { kLr, kLrCv, kSvm, kRf, kMlp, kLda, kQda };

std::string_view to_string(ClassifierKind k);
/// Throws ConfigError for unknown names.
ClassifierKind parse_classifier(std::string_view s);

/// Multiclass classifier over labels 0..n_classes-1. Fitting may use
/// randomness only through the seed given at construction.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ClassifierKind kind() const = 0;
  /// Throws DataError on non-finite inputs or mismatched sizes.
  virtual void fit(const Matrix& x, const Labels& y, int n_classes) = 0;
  /// n x n_classes decision scores; the predicted class is the row argmax
  /// (lowest index on ties).
  virtual Matrix scores(const Matrix& x) const = 0;
  virtual nlohmann::json to_json() const = 0;

  Labels predict(const Matrix& x) const;
};

std::unique_ptr<Classifier> make_classifier(ClassifierKind kind, std::uint64_t seed);
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

/// Throws DataError when x has non-finite entries, labels are out of range
/// or sizes disagree.
void check_training_data(const Matrix& x, const Labels& y, int n_classes);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace cefr::ml
