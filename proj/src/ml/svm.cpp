#include "cefr/ml/svm.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "cefr/error.hpp"

namespace cefr::ml {
namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix rbf(const Matrix& a, const Matrix& b, double gamma) {
  const Vector an = a.rowwise().squaredNorm();
  const Vector bn = b.rowwise().squaredNorm();
  Matrix k = -2.0 * a * b.transpose();
  k.colwise() += an;
  k.rowwise() += bn.transpose();
  return (-gamma * k.cwiseMax(0.0)).array().exp().matrix();
}

}  // namespace

BinarySvmSolution solve_binary_svm(const Matrix& kernel, const std::vector<int>& y, double c, double tol,
                                   long max_iter) {
  const std::size_t n = y.size();
  BinarySvmSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double>& alpha = sol.alpha;
  std::vector<double> grad(n, -1.0);
  auto q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * kernel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };
  auto upper = [&](std::size_t i) { return alpha[i] >= c; };
  auto lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

  for (; sol.iterations < max_iter; ++sol.iterations) {
    // Working set: i maximises -y G over I_up, j minimises the second-order
    // objective decrease over I_low.
    double gmax = -kInf;
    std::ptrdiff_t gi = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          gi = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        gi = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (gi < 0) break;
    const auto i = static_cast<std::size_t>(gi);
    double gmax2 = -kInf;
    std::ptrdiff_t gj = -1;
    double best = kInf;
    const double kii = kernel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    for (std::size_t t = 0; t < n; ++t) {
      const double ktt = kernel(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t));
      if (y[t] == 1) {
        if (lower(t)) continue;
        const double diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (diff > 0) {
          double quad = kii + ktt - 2.0 * y[i] * q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            gj = static_cast<std::ptrdiff_t>(t);
          }
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0) {
          double quad = kii + ktt + 2.0 * y[i] * q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            gj = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    if (gmax + gmax2 < tol || gj < 0) break;
    const auto j = static_cast<std::size_t>(gj);

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double kjj = kernel(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    const double qij = q(i, j);
    if (y[i] != y[j]) {
      double quad = kii + kjj + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = kii + kjj - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }

  double ub = kInf;
  double lb = -kInf;
  double sum_free = 0.0;
  int n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  return sol;
}

void Svm::fit(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  n_classes_ = n_classes;
  gamma_ = options_.gamma;
  if (gamma_ <= 0.0) {
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    gamma_ = var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;
  }
  const Matrix kernel = rbf(x, x, gamma_);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n_classes));
  for (Eigen::Index i = 0; i < x.rows(); ++i) members[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])].push_back(i);

  pairs_.clear();
  std::map<Eigen::Index, int> sv_index;
  std::vector<Eigen::Index> sv_rows;
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b) {
      const auto& ma = members[static_cast<std::size_t>(a)];
      const auto& mb = members[static_cast<std::size_t>(b)];
      if (ma.empty() || mb.empty()) continue;
      std::vector<Eigen::Index> rows(ma);
      rows.insert(rows.end(), mb.begin(), mb.end());
      std::vector<int> yy(rows.size(), -1);
      std::fill(yy.begin(), yy.begin() + static_cast<std::ptrdiff_t>(ma.size()), 1);
      Matrix sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t s = 0; s < rows.size(); ++s) sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = kernel(rows[r], rows[s]);
      }
      const BinarySvmSolution sol = solve_binary_svm(sub, yy, options_.c, options_.tol, options_.max_iter);
      PairModel pm;
      pm.first = a;
      pm.second = b;
      pm.rho = sol.rho;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (sol.alpha[r] <= 0.0) continue;
        auto [it, inserted] = sv_index.emplace(rows[r], static_cast<int>(sv_rows.size()));
        if (inserted) sv_rows.push_back(rows[r]);
        pm.support.push_back(it->second);
        pm.coef.push_back(sol.alpha[r] * yy[r]);
      }
      pairs_.push_back(std::move(pm));
    }
  }
  support_vectors_.resize(static_cast<Eigen::Index>(sv_rows.size()), x.cols());
  for (std::size_t r = 0; r < sv_rows.size(); ++r) support_vectors_.row(static_cast<Eigen::Index>(r)) = x.row(sv_rows[r]);
}

Matrix Svm::decision_values(const Matrix& x) const {
  if (x.cols() != support_vectors_.cols()) throw DataError("SVM input has the wrong number of features");
  const Matrix k = rbf(x, support_vectors_, gamma_);
  Matrix out(x.rows(), static_cast<Eigen::Index>(pairs_.size()));
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const PairModel& pm = pairs_[p];
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double f = -pm.rho;
      for (std::size_t s = 0; s < pm.support.size(); ++s) f += pm.coef[s] * k(i, pm.support[s]);
      out(i, static_cast<Eigen::Index>(p)) = f;
    }
  }
  return out;
}

Matrix Svm::scores(const Matrix& x) const {
  const Matrix dv = decision_values(x);
  Matrix votes = Matrix::Zero(x.rows(), n_classes_);
  Matrix conf = Matrix::Zero(x.rows(), n_classes_);
  std::vector<bool> trained(static_cast<std::size_t>(n_classes_), false);
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const PairModel& pm = pairs_[p];
    trained[static_cast<std::size_t>(pm.first)] = trained[static_cast<std::size_t>(pm.second)] = true;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double f = dv(i, static_cast<Eigen::Index>(p));
      votes(i, f > 0 ? pm.first : pm.second) += 1.0;
      conf(i, pm.first) += f;
      conf(i, pm.second) -= f;
    }
  }
  // Confidences are squashed into (-1/3, 1/3) so they only break vote ties.
  Matrix s = votes + (conf.array() / (3.0 * (conf.array().abs() + 1.0))).matrix();
  for (int c = 0; c < n_classes_; ++c) {
    if (!trained[static_cast<std::size_t>(c)] && !pairs_.empty()) s.col(c).setConstant(std::numeric_limits<double>::lowest());
  }
  return s;
}

nlohmann::json Svm::to_json() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairModel& pm : pairs_) {
    pairs.push_back({{"first", pm.first}, {"second", pm.second}, {"support", pm.support}, {"coef", pm.coef}, {"rho", pm.rho}});
  }
  return {{"kind", to_string(kind())},
          {"c", options_.c},
          {"gamma_option", options_.gamma},
          {"tol", options_.tol},
          {"gamma", gamma_},
          {"n_classes", n_classes_},
          {"support_vectors", matrix_to_json(support_vectors_)},
          {"pairs", pairs}};
}

std::unique_ptr<Svm> Svm::from_json(const nlohmann::json& j) {
  SvmOptions o;
  o.c = j.at("c").get<double>();
  o.gamma = j.at("gamma_option").get<double>();
  o.tol = j.at("tol").get<double>();
  auto m = std::make_unique<Svm>(o);
  m->gamma_ = j.at("gamma").get<double>();
  m->n_classes_ = j.at("n_classes").get<int>();
  m->support_vectors_ = matrix_from_json(j.at("support_vectors"));
  for (const auto& p : j.at("pairs")) {
    PairModel pm;
    pm.first = p.at("first").get<int>();
    pm.second = p.at("second").get<int>();
    pm.support = p.at("support").get<std::vector<int>>();
    pm.coef = p.at("coef").get<std::vector<double>>();
    pm.rho = p.at("rho").get<double>();
    for (int s : pm.support) {
      if (s < 0 || s >= m->support_vectors_.rows()) throw DataError("SVM support index out of range");
    }
    if (pm.support.size() != pm.coef.size()) throw DataError("SVM pair has mismatched coefficients");
    m->pairs_.push_back(std::move(pm));
  }
  return m;
}

}  // namespace cefr::ml
