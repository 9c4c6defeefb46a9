#include "cefr/ml/classifier.hpp"

#include <array>
#include <cmath>
#include <string>

#include "cefr/error.hpp"
#include "cefr/ml/forest.hpp"
#include "cefr/ml/linear.hpp"
#include "cefr/ml/mlp.hpp"
#include "cefr/ml/svm.hpp"

namespace cefr::ml {
namespace {

constexpr std::array<std::pair<ClassifierKind, std::string_view>, 7> kNames{{
    {ClassifierKind::kLr, "lr"},
    {ClassifierKind::kLrCv, "lr_cv"},
    {ClassifierKind::kSvm, "svm"},
    {ClassifierKind::kRf, "rf"},
    {ClassifierKind::kMlp, "mlp"},
    {ClassifierKind::kLda, "lda"},
    {ClassifierKind::kQda, "qda"},
}};

}  // namespace

std::string_view to_string(ClassifierKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

ClassifierKind parse_classifier(std::string_view s) {
  for (const auto& [kind, name] : kNames) {
    if (name == s) return kind;
  }
  throw ConfigError("unknown classifier '" + std::string(s) + "' (expected lr, lr_cv, svm, rf, mlp, lda or qda)");
}

Labels Classifier::predict(const Matrix& x) const {
  const Matrix s = scores(x);
  Labels out(static_cast<std::size_t>(s.rows()), 0);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(i, c) > s(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::unique_ptr<Classifier> make_classifier(ClassifierKind kind, std::uint64_t seed) {
  switch (kind) {
    case ClassifierKind::kLr:
      return std::make_unique<LogisticRegression>();
    case ClassifierKind::kLrCv:
      return std::make_unique<LogisticRegressionCV>(seed);
    case ClassifierKind::kSvm:
      return std::make_unique<Svm>();
    case ClassifierKind::kRf:
      return std::make_unique<RandomForest>(seed);
    case ClassifierKind::kMlp:
      return std::make_unique<Mlp>(seed);
    case ClassifierKind::kLda:
      return std::make_unique<LinearDiscriminant>();
    case ClassifierKind::kQda:
      return std::make_unique<QuadraticDiscriminant>();
  }
  throw ConfigError("unknown classifier kind");
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
  try {
    switch (parse_classifier(j.at("kind").get<std::string>())) {
      case ClassifierKind::kLr:
        return LogisticRegression::from_json(j);
      case ClassifierKind::kLrCv:
        return LogisticRegressionCV::from_json(j);
      case ClassifierKind::kSvm:
        return Svm::from_json(j);
      case ClassifierKind::kRf:
        return RandomForest::from_json(j);
      case ClassifierKind::kMlp:
        return Mlp::from_json(j);
      case ClassifierKind::kLda:
        return LinearDiscriminant::from_json(j);
      case ClassifierKind::kQda:
        return QuadraticDiscriminant::from_json(j);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed classifier: ") + e.what());
  }
  throw DataError("malformed classifier");
}

void check_training_data(const Matrix& x, const Labels& y, int n_classes) {
  if (n_classes < 2) throw DataError("need at least two classes");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw DataError("feature rows and labels differ in number");
  if (x.rows() == 0 || x.cols() == 0) throw DataError("empty training matrix");
  if (!x.allFinite()) throw DataError("training matrix has non-finite entries");
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw DataError("label out of range: " + std::to_string(label));
  }
}

nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw DataError("matrix data does not match its shape");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = data[k++];
      m(i, c) = v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>();
    }
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) out.push_back(v[i]);
    else out.push_back(nullptr);
  }
  return out;
}

Vector vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].is_null() ? -std::numeric_limits<double>::infinity() : j[i].get<double>();
  }
  return v;
}

}  // namespace cefr::ml
