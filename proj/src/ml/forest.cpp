#include "cefr/ml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cefr/error.hpp"
#include "cefr/random.hpp"

namespace cefr::ml {
namespace {

struct Builder {
  const Matrix& x;
  const Labels& y;
  int k;
  int max_features;
  Rng& rng;
  RandomForest::Tree tree;

  double gini(const std::vector<double>& counts, double total) const {
    if (total <= 0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += (c / total) * (c / total);
    return 1.0 - s;
  }

  std::vector<double> counts_of(const std::vector<std::size_t>& rows) const {
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (std::size_t r : rows) counts[static_cast<std::size_t>(y[r])] += 1.0;
    return counts;
  }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  // Best split of rows on feature f by weighted child Gini; feature = -1
  // when the feature is constant on these rows.
  Split best_on(const std::vector<std::size_t>& rows, int f) const {
    std::vector<std::size_t> order = rows;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = x(static_cast<Eigen::Index>(a), f);
      const double vb = x(static_cast<Eigen::Index>(b), f);
      return va < vb || (va == vb && a < b);
    });
    std::vector<double> left(static_cast<std::size_t>(k), 0.0);
    std::vector<double> right = counts_of(rows);
    const double n = static_cast<double>(rows.size());
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const auto c = static_cast<std::size_t>(y[order[i]]);
      left[c] += 1.0;
      right[c] -= 1.0;
      const double v = x(static_cast<Eigen::Index>(order[i]), f);
      const double next = x(static_cast<Eigen::Index>(order[i + 1]), f);
      if (next <= v) continue;
      const double nl = static_cast<double>(i + 1);
      const double imp = (nl * gini(left, nl) + (n - nl) * gini(right, n - nl)) / n;
      if (imp < best.impurity) {
        best.impurity = imp;
        best.feature = f;
        best.threshold = v + 0.5 * (next - v);
        if (best.threshold >= next) best.threshold = v;
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& rows) {
    const int id = static_cast<int>(tree.size());
    tree.emplace_back();
    const std::vector<double> counts = counts_of(rows);
    const double n = static_cast<double>(rows.size());
    const double parent = gini(counts, n);
    if (parent <= 0.0 || rows.size() < 2) {
      make_leaf(id, counts, n);
      return id;
    }
    // Visit features in random order; keep drawing past max_features until a
    // valid split exists, as the search does not stop on constant features.
    std::vector<int> features(static_cast<std::size_t>(x.cols()));
    std::iota(features.begin(), features.end(), 0);
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    int visited = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const std::size_t j = i + rng.below(features.size() - i);
      std::swap(features[i], features[j]);
      const Split s = best_on(rows, features[i]);
      if (s.feature >= 0) {
        ++visited;
        if (s.impurity < best.impurity) best = s;
      }
      if (visited >= max_features) break;
    }
    if (best.feature < 0) {
      make_leaf(id, counts, n);
      return id;
    }
    std::vector<std::size_t> l;
    std::vector<std::size_t> r;
    for (std::size_t row : rows) {
      (x(static_cast<Eigen::Index>(row), best.feature) <= best.threshold ? l : r).push_back(row);
    }
    tree[static_cast<std::size_t>(id)].feature = best.feature;
    tree[static_cast<std::size_t>(id)].threshold = best.threshold;
    const int left_id = grow(l);
    const int right_id = grow(r);
    tree[static_cast<std::size_t>(id)].left = left_id;
    tree[static_cast<std::size_t>(id)].right = right_id;
    return id;
  }

  void make_leaf(int id, std::vector<double> counts, double n) {
    for (double& c : counts) c /= n;
    tree[static_cast<std::size_t>(id)].value = std::move(counts);
  }
};

}  // namespace

void RandomForest::fit(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  if (options_.trees < 1) throw ConfigError("random forest needs at least one tree");
  n_classes_ = n_classes;
  n_features_ = static_cast<int>(x.cols());
  const int max_features =
      options_.max_features > 0
          ? std::min(options_.max_features, n_features_)
          : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features_)))));
  trees_.clear();
  const std::size_t n = static_cast<std::size_t>(x.rows());
  for (int t = 0; t < options_.trees; ++t) {
    Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows(n);
    if (options_.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) rows[i] = rng.below(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    Builder b{x, y, n_classes, max_features, rng, {}};
    b.grow(rows);
    trees_.push_back(std::move(b.tree));
  }
}

Matrix RandomForest::scores(const Matrix& x) const {
  if (x.cols() != n_features_) throw DataError("random forest input has the wrong number of features");
  Matrix s = Matrix::Zero(x.rows(), n_classes_);
  for (const Tree& tree : trees_) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      int node = 0;
      while (tree[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = tree[static_cast<std::size_t>(node)];
        node = x(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
      }
      const auto& v = tree[static_cast<std::size_t>(node)].value;
      for (int c = 0; c < n_classes_; ++c) s(i, c) += v[static_cast<std::size_t>(c)];
    }
  }
  if (!trees_.empty()) s /= static_cast<double>(trees_.size());
  return s;
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : trees_) {
    // Columnar node storage keeps model files compact.
    nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(), value = nlohmann::json::array();
    for (const Node& nd : tree) {
      feature.push_back(nd.feature);
      threshold.push_back(nd.threshold);
      left.push_back(nd.left);
      right.push_back(nd.right);
      value.push_back(nd.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
  }
  return {{"kind", to_string(kind())},
          {"seed", seed_},
          {"n_trees", options_.trees},
          {"max_features", options_.max_features},
          {"bootstrap", options_.bootstrap},
          {"n_classes", n_classes_},
          {"n_features", n_features_},
          {"trees", trees}};
}

std::unique_ptr<RandomForest> RandomForest::from_json(const nlohmann::json& j) {
  ForestOptions o;
  o.trees = j.at("n_trees").get<int>();
  o.max_features = j.at("max_features").get<int>();
  o.bootstrap = j.at("bootstrap").get<bool>();
  auto m = std::make_unique<RandomForest>(j.at("seed").get<std::uint64_t>(), o);
  m->n_classes_ = j.at("n_classes").get<int>();
  m->n_features_ = j.at("n_features").get<int>();
  for (const auto& t : j.at("trees")) {
    Tree tree(t.at("feature").size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
      tree[i].feature = t["feature"][i].get<int>();
      tree[i].threshold = t["threshold"][i].get<double>();
      tree[i].left = t["left"][i].get<int>();
      tree[i].right = t["right"][i].get<int>();
      tree[i].value = t["value"][i].get<std::vector<double>>();
      const bool leaf = tree[i].feature < 0;
      if (leaf && tree[i].value.size() != static_cast<std::size_t>(m->n_classes_)) {
        throw DataError("random forest leaf has the wrong number of classes");
      }
      if (!leaf && (tree[i].left <= 0 || tree[i].right <= 0 || static_cast<std::size_t>(tree[i].left) >= tree.size() ||
                    static_cast<std::size_t>(tree[i].right) >= tree.size())) {
        throw DataError("random forest node has invalid children");
      }
    }
    m->trees_.push_back(std::move(tree));
  }
  return m;
}

}  // namespace cefr::ml
