#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cefr/corpus.hpp"
#include "cefr/matrix.hpp"

namespace cefr {

struct AuditConfig {
  double alpha0 = 0.05;
  double bonferroni_denominator = 148.0;
  /// Literal mode rounds alpha0 / denominator to one significant digit
  /// (0.05 / 148 -> 0.0003); exact mode uses the quotient itself.
  bool literal_threshold = true;
  double posthoc_alpha = 0.05;
  double min_abs_rho = 0.2;
  /// Rows used for the audit; nullopt uses every row.
  std::optional<Split> split = Split::kTrain;
  unsigned threads = 0;  // 0 = hardware concurrency

  double threshold() const;
  nlohmann::json to_json() const;
  static AuditConfig from_json(const nlohmann::json& j);
};

struct LevelSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct TextTypeTest {
  Level level = Level::kA2;
  std::vector<std::pair<TextType, LevelSummary>> groups;
  double p_value = 1.0;
  bool significant = false;
};

struct RelevanceVerdict {
  std::string feature_id;
  std::array<LevelSummary, kLevelCount> levels{};
  std::size_t excluded_degenerate = 0;

  double anova_f = 0.0;
  double anova_p = 1.0;
  bool anova_significant = false;
  /// Games-Howell p for A2-B1, B1-B2, B2-C1.
  std::array<double, 3> adjacent_p{1.0, 1.0, 1.0};
  std::array<bool, 3> adjacent_significant{};
  /// Games-Howell p for every level pair, indexed [i][j].
  std::array<std::array<double, kLevelCount>, kLevelCount> pairwise_p{};

  bool monotonic = false;
  int direction = 0;  // +1 increasing, -1 decreasing, 0 otherwise
  double spearman_rho = 0.0;

  std::vector<TextTypeTest> text_type_tests;
  std::array<bool, kLevelCount> text_type_variation{};
  std::array<bool, 3> interfered_pairs{};

  std::array<bool, 4> criteria{};
  bool relevant = false;
  std::string rationale;

  nlohmann::json to_json() const;
};

struct RelevanceReport {
  AuditConfig config;
  double threshold = 0.0;
  std::vector<RelevanceVerdict> verdicts;

  std::vector<std::string> relevant_ids() const;
  nlohmann::json to_json() const;
  /// Per-level mean (SD), adjacent-pair checkmarks, rho and the decision path.
  std::string render_table() const;
};

/// Audits every matrix column against the relevance criteria. Rows flagged
/// degenerate for a feature are left out of that feature's tests. Throws
/// DataError when a level has fewer than two usable rows.
RelevanceReport audit_relevance(const FeatureMatrix& matrix, const AuditConfig& config = {});

RelevanceVerdict audit_feature(const std::string& feature_id, const std::vector<double>& values,
                               const std::vector<DocMeta>& meta, const AuditConfig& config);

}  // namespace cefr
