#include <doctest.h>

#include <cmath>

#include "cefr/error.hpp"
#include "cefr/random.hpp"
#include "stats_fixtures.hpp"

using namespace cefr;
using namespace cefr::stats;

TEST_SUITE("stats") {
  TEST_CASE("reference fixtures") {
    const auto d = testing::compare_stats_fixtures(testing::load_stats_reference());
    CHECK(d.fixtures == 20);
    CHECK(d.anova <= 1e-6);
    CHECK(d.t_test <= 1e-6);
    CHECK(d.gh_stat <= 1e-6);
    CHECK(d.gh_p <= 1e-4);
    CHECK(d.spearman <= 1e-6);
  }

  TEST_CASE("studentized range quantile") {
    const double q = studentized_range_quantile(0.95, 3, 10);
    CHECK(std::fabs(q - 3.877) <= 0.01);
    CHECK(std::fabs(q - testing::load_stats_reference().at("studentized_range_q95_k3_df10").get<double>()) <= 1e-6);
    CHECK(studentized_range_cdf(q, 3, 10) == doctest::Approx(0.95).epsilon(1e-9));
    // normal-theory limit: q(0.95; 2, inf) = 1.96 * sqrt(2)
    CHECK(studentized_range_quantile(0.95, 2, 1e9) == doctest::Approx(1.959964 * std::sqrt(2.0)).epsilon(1e-5));
  }

  TEST_CASE("textbook distribution values") {
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(student_t_cdf(2.228138851986522, 10) == doctest::Approx(0.975).epsilon(1e-10));
    CHECK(f_sf(3.708264819, 3, 10) == doctest::Approx(0.05).epsilon(1e-7));
    CHECK(student_t_two_sided_p(0.0, 7) == doctest::Approx(1.0));
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    const double params[] = {3.0, 10.0};
    CHECK(dist_cdf(Distribution::kF, params, 3.708264819) == doctest::Approx(0.95).epsilon(1e-7));
    const double bad[] = {-1.0};
    CHECK_THROWS_AS(dist_cdf(Distribution::kStudentT, bad, 1.0), StatisticError);
  }

  TEST_CASE("variance uses the n - 1 denominator") {
    const std::vector<double> x = {1, 2, 3, 4};
    CHECK(variance(x) == doctest::Approx(5.0 / 3.0));
    CHECK(mean(x) == 2.5);
  }

  TEST_CASE("Welch ANOVA reduces to Welch t squared for two groups") {
    GroupedSample s{{{"a", {1.0, 2.5, 3.1, 4.7, 2.2}}, {"b", {3.3, 5.1, 4.4, 6.0, 5.5, 4.9}}}};
    const auto a = welch_anova(s);
    const auto t = welch_t_test(s.groups[0].second, s.groups[1].second);
    CHECK(a.statistic == doctest::Approx(t.statistic * t.statistic).epsilon(1e-10));
    CHECK(a.df2 == doctest::Approx(t.df).epsilon(1e-10));
    CHECK(a.p_value == doctest::Approx(t.p_value).epsilon(1e-9));
  }

  TEST_CASE("degenerate samples") {
    GroupedSample flat{{{"a", {1, 1, 1}}, {"b", {1, 1, 1}}, {"c", {1, 1}}}};
    CHECK_THROWS_AS(welch_anova(flat), StatisticError);
    GroupedSample tiny{{{"a", {1}}, {"b", {1, 2}}}};
    CHECK_THROWS_AS(welch_anova(tiny), StatisticError);
    const std::vector<double> c1 = {2, 2, 2}, c2 = {2, 2}, c3 = {3, 3};
    CHECK(welch_t_test(c1, c2).p_value == 1.0);
    CHECK(welch_t_test(c1, c3).p_value == 0.0);
    const std::vector<double> k = {1, 1, 1, 1}, v = {1, 2, 3, 4};
    CHECK_THROWS_AS(spearman_rho(k, v), StatisticError);
    // one zero-variance group among varying groups still yields a finite statistic
    GroupedSample mixed{{{"a", {5, 5, 5, 5}}, {"b", {1, 2, 3, 2}}, {"c", {2, 4, 3, 1}}}};
    const auto r = welch_anova(mixed);
    CHECK(std::isfinite(r.statistic));
    CHECK(r.p_value < 0.05);
  }

  TEST_CASE("tie-heavy Spearman equals brute-force ranking") {
    const std::vector<double> x = {3, 1, 3, 2, 2, 2, 5, 1, 3, 4};
    const std::vector<double> y = {0, 0, 0, 1, 1, 1, 2, 2, 3, 3};
    const auto rx = average_ranks(x);
    // ranks by hand: 1s -> 1.5, 2s -> 4, 3s -> 7, 4 -> 9, 5 -> 10
    const std::vector<double> expect = {7, 1.5, 7, 4, 4, 4, 10, 1.5, 7, 9};
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(rx[i] == expect[i]);
    const auto ry = average_ranks(y);
    CHECK(spearman_rho(x, y) == doctest::Approx(pearson_r(rx, ry)).epsilon(1e-14));
  }

  TEST_CASE("null p-values are close to uniform") {
    Rng rng(99);
    std::vector<double> p;
    for (int run = 0; run < 300; ++run) {
      GroupedSample s;
      for (const char* g : {"a", "b", "c", "d"}) {
        std::vector<double> v;
        for (int i = 0; i < 12; ++i) v.push_back(rng.normal(0.0, 1.0 + 0.5 * (g[0] - 'a')));
        s.groups.emplace_back(g, v);
      }
      p.push_back(welch_anova(s).p_value);
    }
    CHECK(testing::ks_uniform(p) <= 0.08);
  }
}
