#pragma once

#include <span>

namespace cefr::stats {

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

double normal_cdf(double x);

double student_t_cdf(double x, double df);
/// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

double f_cdf(double x, double df1, double df2);
/// P(F >= x), computed without cancellation.
double f_sf(double x, double df1, double df2);

/// CDF of the studentized range for k groups and df error degrees of
/// freedom; df = +inf (or very large) uses the normal-theory limit.
double studentized_range_cdf(double q, double k, double df);
double studentized_range_sf(double q, double k, double df);
double studentized_range_quantile(double p, double k, double df);

enum class Distribution { kStudentT, kF, kStudentizedRange };

/// Generic entry point. params: t -> {df}; F -> {df1, df2}; studentized
/// range -> {k, df}. Throws StatisticError on invalid parameters.
double dist_cdf(Distribution kind, std::span<const double> params, double x);

/// 64-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre64 {
  double nodes[64];
  double weights[64];
  static const GaussLegendre64& instance();
};

}  // namespace cefr::stats
