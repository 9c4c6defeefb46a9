#include "cefr/stats/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cefr/error.hpp"

namespace cefr::stats {
namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

constexpr double kLargeDf = 1e7;

// Gauss-Legendre nodes for the inner normal-range integral over [-8.5, 8.5].
struct InnerRule {
  static constexpr int kPanels = 2;
  static constexpr int kNodes = 64 * kPanels;
  double z[kNodes];
  double weighted_phi[kNodes];
  double cdf[kNodes];
};

const InnerRule& inner_rule();

// W(w) = k * integral phi(z) [Phi(z) - Phi(z - w)]^(k-1) dz, the range CDF
// of k standard normals.
double normal_range_cdf(double w, double k) {
  if (w <= 0.0) return 0.0;
  const InnerRule& r = inner_rule();
  double sum = 0.0;
  for (int i = 0; i < InnerRule::kNodes; ++i) {
    const double diff = r.cdf[i] - normal_cdf(r.z[i] - w);
    if (diff <= 0.0) continue;
    sum += r.weighted_phi[i] * std::pow(diff, k - 1.0);
  }
  return std::clamp(k * sum, 0.0, 1.0);
}

void require(bool ok, const char* msg) {
  if (!ok) throw StatisticError(msg);
}

const InnerRule& inner_rule() {
  static const InnerRule rule = [] {
    InnerRule r{};
    const GaussLegendre64& gl = GaussLegendre64::instance();
    constexpr double kLo = -8.5;
    constexpr double kHi = 8.5;
    const double half = 0.5 * (kHi - kLo) / InnerRule::kPanels;
    for (int p = 0; p < InnerRule::kPanels; ++p) {
      const double mid = kLo + (2 * p + 1) * half;
      for (int i = 0; i < 64; ++i) {
        const int idx = p * 64 + i;
        r.z[idx] = mid + half * gl.nodes[i];
        r.weighted_phi[idx] =
            gl.weights[i] * half * std::exp(-0.5 * r.z[idx] * r.z[idx]) / std::sqrt(2.0 * std::numbers::pi);
        r.cdf[idx] = normal_cdf(r.z[idx]);
      }
    }
    return r;
  }();
  return rule;
}

}  // namespace

const GaussLegendre64& GaussLegendre64::instance() {
  static const GaussLegendre64 rule = [] {
    GaussLegendre64 r{};
    constexpr int n = 64;
    for (int i = 0; i < n / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-16) break;
      }
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      r.nodes[i] = -x;
      r.nodes[n - 1 - i] = x;
      r.weights[i] = w;
      r.weights[n - 1 - i] = w;
    }
    return r;
  }();
  return rule;
}

double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete beta requires positive shape parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double student_t_cdf(double x, double df) {
  require(df > 0.0, "t distribution requires df > 0");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
  return x >= 0.0 ? 1.0 - tail : tail;
}

double student_t_two_sided_p(double t, double df) {
  require(df > 0.0, "t distribution requires df > 0");
  if (std::isinf(t)) return 0.0;
  return std::min(1.0, incomplete_beta(0.5 * df, 0.5, df / (df + t * t)));
}

double f_cdf(double x, double df1, double df2) {
  require(df1 > 0.0 && df2 > 0.0, "F distribution requires positive degrees of freedom");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return incomplete_beta(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2));
}

double f_sf(double x, double df1, double df2) {
  require(df1 > 0.0 && df2 > 0.0, "F distribution requires positive degrees of freedom");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * x));
}

double studentized_range_cdf(double q, double k, double df) {
  require(k >= 2.0, "studentized range requires k >= 2");
  require(df > 0.0, "studentized range requires df > 0");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (df >= kLargeDf) return normal_range_cdf(q, k);

  // Integrate W(q s) against the density of s = sqrt(chi2_df / df) after the
  // substitution s = exp(u); the log-density relative to its peak at u = 0 is
  // df * (u - (exp(2u) - 1) / 2).
  const double log_c = std::log(2.0) + 0.5 * df * std::log(0.5 * df) - std::lgamma(0.5 * df);
  auto rel = [df](double u) { return df * (u - 0.5 * std::expm1(2.0 * u)); };
  constexpr double kCut = -50.0;
  // rel is concave with maximum 0 at u = 0; bracket both crossings of kCut.
  auto crossing = [&](double inside, double outside) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (inside + outside);
      (rel(mid) > kCut ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  double lo = -1.0;
  while (rel(lo) > kCut) lo *= 2.0;
  double hi = 1.0;
  while (rel(hi) > kCut) hi *= 2.0;
  const double u_lo = crossing(0.0, lo);
  const double u_hi = crossing(0.0, hi);

  const GaussLegendre64& gl = GaussLegendre64::instance();
  const int panels = std::max(4, static_cast<int>(std::ceil((u_hi - u_lo) * std::sqrt(df) / 2.0)));
  const double width = (u_hi - u_lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double half = 0.5 * width;
    const double mid = u_lo + p * width + half;
    for (int i = 0; i < 64; ++i) {
      const double u = mid + half * gl.nodes[i];
      const double density = std::exp(log_c + df * u - 0.5 * df * std::exp(2.0 * u));
      if (density == 0.0) continue;
      sum += gl.weights[i] * half * density * normal_range_cdf(q * std::exp(u), k);
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

double studentized_range_sf(double q, double k, double df) { return 1.0 - studentized_range_cdf(q, k, df); }

double studentized_range_quantile(double p, double k, double df) {
  require(p > 0.0 && p < 1.0, "quantile requires 0 < p < 1");
  double lo = 0.0;
  double hi = 1.0;
  while (studentized_range_cdf(hi, k, df) < p) {
    lo = hi;
    hi *= 2.0;
    require(hi < 1e6, "studentized range quantile did not bracket");
  }
  for (int i = 0; i < 60 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (studentized_range_cdf(mid, k, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double dist_cdf(Distribution kind, std::span<const double> params, double x) {
  switch (kind) {
    case Distribution::kStudentT:
      require(params.size() == 1, "t distribution takes one parameter (df)");
      return student_t_cdf(x, params[0]);
    case Distribution::kF:
      require(params.size() == 2, "F distribution takes two parameters (df1, df2)");
      return f_cdf(x, params[0], params[1]);
    case Distribution::kStudentizedRange:
      require(params.size() == 2, "studentized range takes two parameters (k, df)");
      return studentized_range_cdf(x, params[0], params[1]);
  }
  throw StatisticError("unknown distribution");
}

}  // namespace cefr::stats
