// Comparison of the statistics routines against the multiprecision reference
// values in data/stats_fixtures.json.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cefr/stats/distributions.hpp"
#include "cefr/stats/tests.hpp"

namespace cefr::testing {

struct StatsDeviation {
  std::size_t fixtures = 0;
  double anova = 0.0;     // F, df2 and p
  double t_test = 0.0;    // t, df and p
  double gh_stat = 0.0;   // Games-Howell statistic and df
  double gh_p = 0.0;
  double spearman = 0.0;
  double q95_reference = 0.0;
};

// Absolute error for values up to 1, relative beyond.
inline double deviation(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

inline nlohmann::json load_stats_reference() {
  std::ifstream in(std::string(CEFR_TEST_DATA) + "/stats_fixtures.json");
  return nlohmann::json::parse(in);
}

inline StatsDeviation compare_stats_fixtures(const nlohmann::json& ref) {
  StatsDeviation d;
  for (const auto& fx : ref.at("fixtures")) {
    ++d.fixtures;
    stats::GroupedSample sample;
    for (const char* label : {"A2", "B1", "B2", "C1"}) {
      sample.groups.emplace_back(label, fx.at("groups").at(label).get<std::vector<double>>());
    }
    const auto a = stats::welch_anova(sample);
    const auto& wa = fx.at("welch_anova");
    d.anova = std::max({d.anova, deviation(a.statistic, wa.at("F")), deviation(a.df2, wa.at("df2")),
                        deviation(a.p_value, wa.at("p")), deviation(a.df1, wa.at("df1"))});

    const auto t = stats::welch_t_test(sample.groups[0].second, sample.groups[1].second);
    const auto& wt = fx.at("welch_t");
    d.t_test = std::max({d.t_test, deviation(t.statistic, wt.at("t")), deviation(t.df, wt.at("df")),
                         deviation(t.p_value, wt.at("p"))});

    const auto gh = stats::games_howell(sample);
    const auto& ref_gh = fx.at("games_howell");
    for (std::size_t i = 0; i < gh.size(); ++i) {
      d.gh_stat = std::max({d.gh_stat, deviation(gh[i].statistic, ref_gh[i].at("statistic")),
                            deviation(gh[i].df, ref_gh[i].at("df"))});
      d.gh_p = std::max(d.gh_p, std::fabs(gh[i].p_value - ref_gh[i].at("p").get<double>()));
    }

    std::vector<double> x, y;
    for (std::size_t g = 0; g < sample.groups.size(); ++g) {
      for (double v : sample.groups[g].second) {
        x.push_back(v);
        y.push_back(static_cast<double>(g));
      }
    }
    d.spearman = std::max(d.spearman, deviation(stats::spearman_rho(x, y), fx.at("spearman_level")));
  }
  d.q95_reference = ref.at("studentized_range_q95_k3_df10");
  return d;
}

/// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
inline double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, static_cast<double>(i + 1) / n - p[i], p[i] - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace cefr::testing
