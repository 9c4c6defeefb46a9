#include "cefr/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "cefr/error.hpp"
#include "cefr/stats/distributions.hpp"

namespace cefr::stats {
namespace {

constexpr double kRelativeVarianceFloor = 1e-10;

void require_groups(const GroupedSample& sample) {
  if (sample.groups.size() < 2) throw StatisticError("at least two groups are required");
  for (const auto& [label, values] : sample.groups) {
    if (values.size() < 2) throw StatisticError("group '" + label + "' has fewer than two values");
  }
}

struct Moments {
  double n;
  double mean;
  double var;
};

Moments moments(std::span<const double> x) {
  return {static_cast<double>(x.size()), mean(x), variance(x)};
}

// Welch-Satterthwaite degrees of freedom for two standard-error terms.
double welch_df(double se1, double n1, double se2, double n2) {
  const double num = (se1 + se2) * (se1 + se2);
  const double den = se1 * se1 / (n1 - 1.0) + se2 * se2 / (n2 - 1.0);
  return num / den;
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  // Two-pass mean for accuracy on large offsets.
  double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double corr = 0.0;
  for (double v : x) corr += v - m;
  return m + corr / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  double ss = 0.0;
  double comp = 0.0;
  for (double v : x) {
    ss += (v - m) * (v - m);
    comp += v - m;
  }
  const double n = static_cast<double>(x.size());
  return (ss - comp * comp / n) / (n - 1.0);
}

double sample_sd(std::span<const double> x) { return std::sqrt(variance(x)); }

AnovaResult welch_anova(const GroupedSample& sample) {
  require_groups(sample);
  const std::size_t k = sample.groups.size();
  std::vector<Moments> m;
  m.reserve(k);
  double max_var = 0.0;
  for (const auto& [label, values] : sample.groups) {
    m.push_back(moments(values));
    max_var = std::max(max_var, m.back().var);
  }
  if (max_var <= 0.0) throw StatisticError("Welch ANOVA is undefined when every group has zero variance");
  const double floor = kRelativeVarianceFloor * max_var;

  std::vector<double> w(k);
  double w_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    w[j] = m[j].n / std::max(m[j].var, floor);
    w_sum += w[j];
  }
  double grand = 0.0;
  for (std::size_t j = 0; j < k; ++j) grand += w[j] * m[j].mean;
  grand /= w_sum;

  double between = 0.0;
  double h_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    between += w[j] * (m[j].mean - grand) * (m[j].mean - grand);
    const double r = 1.0 - w[j] / w_sum;
    h_sum += r * r / (m[j].n - 1.0);
  }
  const double kd = static_cast<double>(k);
  const double a = between / (kd - 1.0);
  const double b = 1.0 + 2.0 * (kd - 2.0) / (kd * kd - 1.0) * h_sum;

  AnovaResult res;
  res.statistic = a / b;
  res.df1 = kd - 1.0;
  res.df2 = (kd * kd - 1.0) / (3.0 * h_sum);
  res.p_value = f_sf(res.statistic, res.df1, res.df2);
  return res;
}

AnovaResult oneway_anova(const GroupedSample& sample) {
  require_groups(sample);
  double n_total = 0.0;
  double sum_total = 0.0;
  for (const auto& [label, values] : sample.groups) {
    n_total += static_cast<double>(values.size());
    sum_total += std::accumulate(values.begin(), values.end(), 0.0);
  }
  const double grand = sum_total / n_total;
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& [label, values] : sample.groups) {
    const double mj = mean(values);
    ss_between += static_cast<double>(values.size()) * (mj - grand) * (mj - grand);
    for (double v : values) ss_within += (v - mj) * (v - mj);
  }
  AnovaResult res;
  res.df1 = static_cast<double>(sample.groups.size()) - 1.0;
  res.df2 = n_total - static_cast<double>(sample.groups.size());
  if (ss_within <= 0.0) {
    res.statistic = ss_between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    res.p_value = ss_between > 0.0 ? 0.0 : 1.0;
    return res;
  }
  res.statistic = (ss_between / res.df1) / (ss_within / res.df2);
  res.p_value = f_sf(res.statistic, res.df1, res.df2);
  return res;
}

PairwiseResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw StatisticError("Welch t-test needs at least two values per sample");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double se_a = ma.var / ma.n;
  const double se_b = mb.var / mb.n;
  PairwiseResult res;
  const double diff = ma.mean - mb.mean;
  if (se_a + se_b <= 0.0) {
    res.df = ma.n + mb.n - 2.0;
    if (diff == 0.0) {
      res.statistic = 0.0;
      res.p_value = 1.0;
    } else {
      res.statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
      res.p_value = 0.0;
    }
    return res;
  }
  res.statistic = diff / std::sqrt(se_a + se_b);
  res.df = welch_df(se_a, ma.n, se_b, mb.n);
  res.p_value = student_t_two_sided_p(res.statistic, res.df);
  return res;
}

std::vector<PairwiseResult> games_howell(const GroupedSample& sample) {
  require_groups(sample);
  const std::size_t k = sample.groups.size();
  std::vector<Moments> m;
  for (const auto& [label, values] : sample.groups) m.push_back(moments(values));
  std::vector<PairwiseResult> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      PairwiseResult r;
      r.pair = {sample.groups[i].first, sample.groups[j].first};
      const double se_i = m[i].var / m[i].n;
      const double se_j = m[j].var / m[j].n;
      const double diff = std::fabs(m[i].mean - m[j].mean);
      if (se_i + se_j <= 0.0) {
        r.df = m[i].n + m[j].n - 2.0;
        r.statistic = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        r.p_value = diff == 0.0 ? 1.0 : 0.0;
      } else {
        r.statistic = diff * std::numbers::sqrt2 / std::sqrt(se_i + se_j);
        r.df = welch_df(se_i, m[i].n, se_j, m[j].n);
        r.p_value = std::clamp(studentized_range_sf(r.statistic, static_cast<double>(k), r.df), 0.0, 1.0);
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatisticError("correlation inputs differ in length");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (x.empty() || constant(x) || constant(y)) throw StatisticError("correlation is undefined for constant input");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw StatisticError("correlation is undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatisticError("correlation inputs differ in length");
  if (x.size() < 3) throw StatisticError("Spearman correlation needs at least three pairs");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson_r(rx, ry);
}

}  // namespace cefr::stats
