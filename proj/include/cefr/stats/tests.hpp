#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cefr::stats {

struct GroupedSample {
  std::vector<std::pair<std::string, std::vector<double>>> groups;
};

struct AnovaResult {
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
};

struct PairwiseResult {
  std::pair<std::string, std::string> pair;
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator).
double variance(std::span<const double> x);
double sample_sd(std::span<const double> x);

/// Welch's heteroscedastic one-way ANOVA. Groups with zero variance get a
/// tiny variance floor relative to the largest group variance; a sample where
/// every group has zero variance throws StatisticError.
AnovaResult welch_anova(const GroupedSample& sample);

/// Classic equal-variance one-way ANOVA F (used for univariate feature scoring).
AnovaResult oneway_anova(const GroupedSample& sample);

/// Two-sided Welch t-test. Zero variance in both samples gives p = 1 for
/// equal means and p = 0 otherwise.
PairwiseResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Games-Howell post-hoc comparisons for every unordered pair (i < j).
std::vector<PairwiseResult> games_howell(const GroupedSample& sample);

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> x);
double pearson_r(std::span<const double> x, std::span<const double> y);
/// Throws StatisticError for constant input or fewer than 3 points.
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace cefr::stats
