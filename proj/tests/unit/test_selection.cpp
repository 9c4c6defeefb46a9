#include <doctest.h>

#include <cmath>
#include <set>

#include "blobs.hpp"
#include "cefr/error.hpp"
#include "cefr/ml/selection.hpp"

using namespace cefr;
using namespace cefr::ml;

namespace {

// Brute-force one-way ANOVA F from group sums of squares.
double brute_f(const std::vector<double>& v, const Labels& y, int k) {
  std::vector<std::vector<double>> g(k);
  for (std::size_t i = 0; i < v.size(); ++i) g[y[i]].push_back(v[i]);
  double grand = 0.0;
  for (double x : v) grand += x;
  grand /= static_cast<double>(v.size());
  double between = 0.0, within = 0.0;
  for (const auto& grp : g) {
    double m = 0.0;
    for (double x : grp) m += x;
    m /= static_cast<double>(grp.size());
    between += static_cast<double>(grp.size()) * (m - grand) * (m - grand);
    for (double x : grp) within += (x - m) * (x - m);
  }
  return (between / (k - 1)) / (within / (static_cast<double>(v.size()) - k));
}

// Columns 0 and 1 each split the four classes in half along different
// axes; only together do they separate all classes. Columns 2-4 are noise.
testing::Blobs xor_like(std::uint64_t seed) {
  Rng rng(seed);
  testing::Blobs b;
  const int per = 20;
  b.x.resize(4 * per, 5);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < per; ++i) {
      const int r = c * per + i;
      b.x(r, 0) = (c / 2) * 4.0 + rng.normal(0.0, 0.4);
      b.x(r, 1) = (c % 2) * 4.0 + rng.normal(0.0, 0.4);
      for (int j = 2; j < 5; ++j) b.x(r, j) = rng.normal();
      b.y.push_back(c);
    }
  }
  return b;
}

}  // namespace

TEST_SUITE("selection") {
  TEST_CASE("scaler uses population SD and passes constant columns through") {
    ml::Matrix x(4, 2);
    x << 1, 5, 2, 5, 3, 5, 4, 5;
    const Scaler s = Scaler::fit(x);
    CHECK(s.mean[0] == 2.5);
    CHECK(s.scale[0] == doctest::Approx(std::sqrt(1.25)));
    CHECK(s.constant[1]);
    CHECK_FALSE(s.constant[0]);
    CHECK(s.any_constant());
    const ml::Matrix z = s.apply(x);
    CHECK(z.col(0).mean() == doctest::Approx(0.0));
    CHECK(z(0, 1) == 5.0);
    const Scaler back = Scaler::from_json(s.to_json());
    CHECK((back.apply(x) - z).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.subset({1}).constant == std::vector<bool>{true});
  }

  TEST_CASE("test rows are transformed with training statistics") {
    const auto train = testing::make_blobs(2, 10, 2, 1.0, 1.0, 1);
    const ml::Matrix shifted = (train.x.array() + 3.0).matrix();
    const Scaler s = Scaler::fit(train.x);
    const ml::Matrix with_train = s.apply(shifted);
    const ml::Matrix self = Scaler::fit(shifted).apply(shifted);
    CHECK((with_train - self).cwiseAbs().maxCoeff() > 1.0);
    CHECK(with_train.col(0).mean() > 1.0);
  }

  TEST_CASE("ANOVA F scores match the brute-force computation and rank columns") {
    const auto b = testing::make_blobs(4, 12, 6, 0.7, 1.0, 2);
    const auto f = anova_f_scores(b.x, b.y, 4);
    std::vector<std::pair<double, std::size_t>> brute;
    for (Eigen::Index j = 0; j < b.x.cols(); ++j) {
      std::vector<double> col(b.x.col(j).data(), b.x.col(j).data() + b.x.rows());
      const double bf = brute_f(col, b.y, 4);
      CHECK(f[j] == doctest::Approx(bf).epsilon(1e-10));
      brute.emplace_back(-bf, static_cast<std::size_t>(j));
    }
    std::sort(brute.begin(), brute.end());
    const auto top = select_univariate(b.x, b.y, 4, 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(top[i] == brute[i].second);
  }

  TEST_CASE("constant and perfectly separated columns") {
    ml::Matrix x(4, 3);
    x << 1, 0, 7, 1, 0, 8, 1, 1, 9, 1, 1, 6;
    const Labels y = {0, 0, 1, 1};
    const auto f = anova_f_scores(x, y, 2);
    CHECK(f[0] == 0.0);
    CHECK(std::isinf(f[1]));
    CHECK(select_univariate(x, y, 2, 1) == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(select_univariate(x, y, 2, 0), ConfigError);
    CHECK_THROWS_AS(select_univariate(x, y, 2, 4), ConfigError);
  }

  TEST_CASE("sequential selection finds complementary features and stops") {
    const auto b = xor_like(3);
    SequentialTrace trace;
    const auto chosen = select_sequential(b.x, b.y, 4, ClassifierKind::kLda, 42, 0, &trace);
    REQUIRE(chosen.size() == 2);
    CHECK(std::set<std::size_t>(chosen.begin(), chosen.end()) == std::set<std::size_t>{0, 1});
    CHECK(trace.scores[1] == doctest::Approx(1.0));
    CHECK(trace.scores[0] < 0.75);
    CHECK(trace.accepted.size() == 2 + static_cast<std::size_t>(kSequentialPatience));
  }

  TEST_CASE("sequential selection with fixed k returns exactly k columns") {
    const auto b = xor_like(4);
    const auto chosen = select_sequential(b.x, b.y, 4, ClassifierKind::kLda, 42, 4);
    CHECK(chosen.size() == 4);
    CHECK(std::set<std::size_t>(chosen.begin(), chosen.end()).size() == 4);
    CHECK(select_sequential(b.x, b.y, 4, ClassifierKind::kLda, 42, 4) == chosen);
  }

  TEST_CASE("exhausted pool returns every accepted column") {
    const auto b = xor_like(5);
    const ml::Matrix two = b.x.leftCols(2);
    const auto chosen = select_sequential(two, b.y, 4, ClassifierKind::kLda, 42, 0);
    CHECK(chosen.size() == 2);
  }
}
