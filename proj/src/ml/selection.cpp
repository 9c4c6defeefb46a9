#include "cefr/ml/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cefr/error.hpp"
#include "cefr/ml/folds.hpp"

namespace cefr::ml {

Scaler Scaler::fit(const Matrix& x) {
  if (x.rows() == 0) throw DataError("cannot standardise an empty training set");
  Scaler s;
  s.mean = x.colwise().mean().transpose();
  s.scale = Vector::Ones(x.cols());
  s.constant.assign(static_cast<std::size_t>(x.cols()), false);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean[j]).square().mean();
    if (var > 0.0 && std::sqrt(var) > 1e-12 * std::max(1.0, std::fabs(s.mean[j]))) {
      s.scale[j] = std::sqrt(var);
    } else {
      s.mean[j] = 0.0;
      s.constant[static_cast<std::size_t>(j)] = true;
    }
  }
  return s;
}

Matrix Scaler::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DataError("scaler applied to the wrong number of columns");
  Matrix out = x;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

bool Scaler::any_constant() const { return std::find(constant.begin(), constant.end(), true) != constant.end(); }

Scaler Scaler::subset(const std::vector<std::size_t>& cols) const {
  Scaler s;
  s.mean.resize(static_cast<Eigen::Index>(cols.size()));
  s.scale.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    s.mean[static_cast<Eigen::Index>(i)] = mean[static_cast<Eigen::Index>(cols[i])];
    s.scale[static_cast<Eigen::Index>(i)] = scale[static_cast<Eigen::Index>(cols[i])];
    s.constant.push_back(constant[cols[i]]);
  }
  return s;
}

nlohmann::json Scaler::to_json() const {
  return {{"mean", vector_to_json(mean)}, {"scale", vector_to_json(scale)}, {"constant", constant}};
}

Scaler Scaler::from_json(const nlohmann::json& j) {
  Scaler s;
  s.mean = vector_from_json(j.at("mean"));
  s.scale = vector_from_json(j.at("scale"));
  s.constant = j.at("constant").get<std::vector<bool>>();
  if (s.mean.size() != s.scale.size() || s.constant.size() != static_cast<std::size_t>(s.mean.size())) {
    throw DataError("scaler vectors differ in length");
  }
  if ((s.scale.array() <= 0.0).any()) throw DataError("scaler has a non-positive scale");
  return s;
}

std::vector<double> anova_f_scores(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  const auto n = static_cast<double>(x.rows());
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (int label : y) counts[static_cast<std::size_t>(label)] += 1.0;
  const double groups = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }));
  std::vector<double> out(static_cast<std::size_t>(x.cols()), 0.0);
  if (groups < 2 || n - groups <= 0) return out;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double grand = x.col(j).mean();
    std::vector<double> sums(static_cast<std::size_t>(n_classes), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) sums[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += x(i, j);
    double between = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] > 0) between += counts[c] * std::pow(sums[c] / counts[c] - grand, 2);
    }
    double within = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto c = static_cast<std::size_t>(y[static_cast<std::size_t>(i)]);
      within += std::pow(x(i, j) - sums[c] / counts[c], 2);
    }
    const double total = between + within;
    if (!(total > 1e-300)) continue;
    // Round-off can leave a tiny within-group sum for a column that is
    // constant inside every group.
    if (within <= 1e-14 * total) {
      out[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
      continue;
    }
    out[static_cast<std::size_t>(j)] = (between / (groups - 1.0)) / (within / (n - groups));
  }
  return out;
}

std::vector<std::size_t> select_univariate(const Matrix& x, const Labels& y, int n_classes, std::size_t k) {
  if (k < 1 || k > static_cast<std::size_t>(x.cols())) {
    throw ConfigError("k = " + std::to_string(k) + " is outside 1.." + std::to_string(x.cols()));
  }
  const std::vector<double> f = anova_f_scores(x, y, n_classes);
  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
  order.resize(k);
  return order;
}

std::vector<std::size_t> select_sequential(const Matrix& x, const Labels& y, int n_classes, ClassifierKind kind,
                                           std::uint64_t seed, std::size_t k, SequentialTrace* trace) {
  const auto d = static_cast<std::size_t>(x.cols());
  if (k > d) throw ConfigError("k = " + std::to_string(k) + " exceeds the pool of " + std::to_string(d));
  check_training_data(x, y, n_classes);
  std::vector<std::size_t> accepted;
  std::vector<double> scores;
  std::vector<bool> used(d, false);
  double best = -1.0;
  std::size_t best_len = 0;
  int stale = 0;
  while (accepted.size() < d) {
    double round_best = -1.0;
    std::size_t pick = d;
    std::vector<std::size_t> cols = accepted;
    cols.push_back(0);
    for (std::size_t j = 0; j < d; ++j) {
      if (used[j]) continue;
      cols.back() = j;
      const double s = cv_accuracy(kind, seed, take_cols(x, cols), y, n_classes, kSequentialFolds, seed);
      if (s > round_best) {
        round_best = s;
        pick = j;
      }
    }
    used[pick] = true;
    accepted.push_back(pick);
    scores.push_back(round_best);
    if (k > 0) {
      if (accepted.size() == k) break;
      continue;
    }
    if (round_best > best) {
      best = round_best;
      best_len = accepted.size();
      stale = 0;
    } else if (++stale >= kSequentialPatience) {
      break;
    }
  }
  if (trace != nullptr) *trace = {accepted, scores};
  if (k == 0 && stale >= kSequentialPatience) accepted.resize(best_len);
  return accepted;
}

}  // namespace cefr::ml
