#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cefr/corpus.hpp"
#include "cefr/ml/classifier.hpp"

namespace cefr::ml {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample SD
};

/// Evaluation of predicted levels against the truth. Precision, recall and
/// F1 use 0 for 0/0; macro means and SDs run over the levels present in the
/// truth, so macro recall equals balanced accuracy.
struct EvalReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double within_one_level_accuracy = 0.0;
  std::array<ClassMetrics, kLevelCount> per_class{};
  MeanSd macro_precision;
  MeanSd macro_recall;
  MeanSd macro_f1;
  std::array<std::array<std::size_t, kLevelCount>, kLevelCount> confusion{};  // rows = truth
  /// Recall within each text type present in the data.
  std::map<TextType, double> per_text_type_recall;
  /// Recall per (level, text type) cell present in the data.
  std::map<std::pair<Level, TextType>, double> per_level_text_type_recall;

  nlohmann::json to_json() const;
  std::string render_table(const std::string& title = "") const;
};

EvalReport score_predictions(const Labels& truth, const Labels& pred, const std::vector<TextType>& types);

MeanSd mean_sd(const std::vector<double>& values);

}  // namespace cefr::ml
