#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cefr/matrix.hpp"
#include "cefr/ml/classifier.hpp"
#include "cefr/ml/metrics.hpp"
#include "cefr/ml/selection.hpp"

namespace cefr::ml {

enum class FeaturePool { kRelevantOnly, kAll };
enum class SelectorKind { kUnivariate, kSequential };

std::string_view to_string(FeaturePool p);
std::string_view to_string(SelectorKind s);

struct PipelineSpec {
  FeaturePool pool = FeaturePool::kAll;
  SelectorKind selector = SelectorKind::kUnivariate;
  /// Number of features; for sequential selection 0 lets the stopping rule decide.
  std::size_t k = 1;
  ClassifierKind classifier = ClassifierKind::kLr;
  std::uint64_t seed = 42;

  /// e.g. "rel-svm-kbest-23", "all-lr-sfs-3", "all-lda-sfs-auto".
  std::string name() const;
  nlohmann::json to_json() const;
  /// Throws ConfigError on unknown values or a missing seed.
  static PipelineSpec from_json(const nlohmann::json& j);
  /// Inverse of name(); the seed is supplied separately.
  static PipelineSpec parse(std::string_view name, std::uint64_t seed);
  bool operator==(const PipelineSpec&) const = default;
};

/// Expands {"pools": [...], "classifiers": [...], "univariate_k": [...],
/// "sequential_k": [...], "seed": n} into the cartesian product of specs, or
/// reads an explicit "specs" array of spec objects or names.
std::vector<PipelineSpec> expand_grid(const nlohmann::json& grid, std::uint64_t default_seed);

/// Column ids making up the candidate pool. relevant_ids is required for
/// the relevant-only pool; ids are returned in matrix column order.
std::vector<std::string> pool_ids(const FeatureMatrix& matrix, FeaturePool pool,
                                  const std::vector<std::string>* relevant_ids);

/// Per-column training mean over non-degenerate values (0 when none).
std::vector<double> imputation_means(const FeatureMatrix& matrix, const std::vector<std::string>& ids);

/// Dense matrix of the given columns with degenerate entries replaced by the
/// supplied means.
Matrix design_matrix(const FeatureMatrix& matrix, const std::vector<std::string>& ids,
                     const std::vector<double>& means);
Labels level_labels(const FeatureMatrix& matrix);
std::vector<TextType> text_types(const FeatureMatrix& matrix);

struct TrainedModel {
  PipelineSpec spec;
  std::vector<std::string> features;  // selected, in selection order
  std::vector<double> impute_means;   // per selected feature
  Scaler scaler;                      // per selected feature
  std::shared_ptr<const Classifier> classifier;
  /// Training mean per level of each selected feature (raw units).
  std::vector<std::array<double, kLevelCount>> level_means;
  std::string catalog_hash;
  std::optional<std::string> trained_at;
  std::vector<std::string> warnings;

  Labels predict(const FeatureMatrix& matrix) const;
  /// Predicted level index of one document given its full feature row.
  int predict_row(const FeatureMatrix& matrix, std::size_t row) const;
  Matrix scores(const FeatureMatrix& matrix) const;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
};

/// Imputes, standardises and selects on the given training rows, then fits
/// the classifier. Only rows of `matrix` are used, so callers pass the
/// training split.
TrainedModel train(const FeatureMatrix& matrix, const PipelineSpec& spec, const std::vector<std::string>& pool);

struct CvReport {
  PipelineSpec spec;
  std::vector<double> fold_accuracy;
  std::vector<double> fold_macro_precision;
  std::vector<double> fold_macro_recall;
  std::vector<double> fold_macro_f1;
  std::vector<std::size_t> fold_feature_count;
  MeanSd accuracy;
  MeanSd macro_precision;
  MeanSd macro_recall;
  MeanSd macro_f1;
  /// Feature count used for ranking: k, or the rounded mean selected count
  /// when sequential selection picks its own size.
  std::size_t feature_count = 0;

  nlohmann::json to_json() const;
};

inline constexpr std::size_t kCvFolds = 10;

/// Folds stratified by level, shuffled with the spec seed. Throws DataError
/// when a level has fewer rows than folds.
CvReport cross_validate(const FeatureMatrix& matrix, const PipelineSpec& spec, const std::vector<std::string>& pool,
                        std::size_t folds = kCvFolds);

struct RankingOptions {
  std::size_t top = 5;
  std::size_t folds = kCvFolds;
  unsigned threads = 0;
};

/// Cross-validates every spec (in parallel), keeps per pool + selector +
/// classifier the best accuracy at the smallest feature count, and returns
/// the best groups by accuracy, then fewer features, then name.
std::vector<CvReport> rank_pipelines(const FeatureMatrix& matrix, const std::vector<PipelineSpec>& grid,
                                     const std::vector<std::string>* relevant_ids, const RankingOptions& options = {});

std::string render_ranking(const std::vector<CvReport>& ranking);

EvalReport evaluate(const TrainedModel& model, const FeatureMatrix& matrix);

enum class Metric { kAccuracy, kBalancedAccuracy };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

struct FeatureImportance {
  std::string feature;
  double mean_drop = 0.0;
  double sd_drop = 0.0;  // sample SD
  std::vector<double> drops;
};

struct ImportanceReport {
  Metric metric = Metric::kAccuracy;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  double baseline = 0.0;
  std::vector<FeatureImportance> features;  // model selection order

  nlohmann::json to_json() const;
  std::string render_table() const;
};

/// Shuffles one selected column at a time (seeded, independently per repeat)
/// and records the drop of the metric from the unshuffled baseline.
ImportanceReport permutation_importance(const TrainedModel& model, const FeatureMatrix& matrix, Metric metric,
                                        std::size_t repeats, std::uint64_t seed);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
/// Throws DataError when the stored catalog hash differs from expected_hash
/// (skipped when expected_hash is empty).
TrainedModel load_model(const std::filesystem::path& path, const std::string& expected_hash);

}  // namespace cefr::ml
