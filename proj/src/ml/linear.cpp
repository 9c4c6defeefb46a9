#include "cefr/ml/linear.hpp"

#include <cmath>
#include <limits>

#include "cefr/error.hpp"
#include "cefr/ml/folds.hpp"

namespace cefr::ml {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxNewtonIterations = 500;

// Row-wise softmax probabilities of x W^T + b.
Matrix softmax(const Matrix& x, const Matrix& w, const Vector& b) {
  Matrix z = x * w.transpose();
  z.rowwise() += b.transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

// Exact Hessian of the objective in the packed parameter order, where
// parameter (class k, input a) sits at k + K a and a = d is the intercept.
Matrix hessian(const Matrix& x, int k, double c, const Vector& theta) {
  const Eigen::Index d = x.cols();
  const Eigen::Index n = x.rows();
  const Matrix w = Eigen::Map<const Matrix>(theta.data(), k, d);
  const Vector b = theta.tail(k);
  const Matrix p = softmax(x, w, b);
  Matrix xt(n, d + 1);
  xt << x, Vector::Ones(n);
  const Eigen::Index dim = k * (d + 1);
  Matrix h = Matrix::Zero(dim, dim);
  for (int a = 0; a < k; ++a) {
    for (int l = a; l < k; ++l) {
      Vector wts = (a == l) ? Vector(p.col(a).array() * (1.0 - p.col(a).array()))
                            : Vector(-(p.col(a).array() * p.col(l).array()));
      const Matrix block = xt.transpose() * (xt.array().colwise() * wts.array()).matrix();
      for (Eigen::Index r = 0; r <= d; ++r) {
        for (Eigen::Index s = 0; s <= d; ++s) {
          h(a + k * r, l + k * s) = block(r, s);
          h(l + k * s, a + k * r) = block(r, s);
        }
      }
    }
  }
  for (Eigen::Index i = 0; i < k * d; ++i) h(i, i) += 1.0 / c;
  return h;
}

}  // namespace

double LogisticRegression::objective(const Matrix& x, const Labels& y, int n_classes, double c, const Vector& theta,
                                     Vector* grad) {
  const Eigen::Index d = x.cols();
  const Eigen::Index k = n_classes;
  const Matrix w = Eigen::Map<const Matrix>(theta.data(), k, d);
  const Vector b = theta.tail(k);
  Matrix z = x * w.transpose();
  z.rowwise() += b.transpose();
  double f = 0.5 * w.squaredNorm() / c;
  Matrix residual(z.rows(), k);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (z.row(i).array() - m).exp();
    const double s = e.sum();
    f += m + std::log(s) - z(i, y[static_cast<std::size_t>(i)]);
    residual.row(i) = e / s;
    residual(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  }
  if (grad != nullptr) {
    grad->resize(k * d + k);
    const Matrix gw = residual.transpose() * x + w / c;
    Eigen::Map<Matrix>(grad->data(), k, d) = gw;
    grad->tail(k) = residual.colwise().sum().transpose();
  }
  return f;
}

void LogisticRegression::fit(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  if (!(c_ > 0.0)) throw ConfigError("logistic regression needs C > 0");
  const Eigen::Index d = x.cols();
  Vector theta = Vector::Zero(n_classes * (d + 1));

  // Damped Newton on the exact Hessian with Armijo backtracking. The
  // intercept direction shared by all classes is flat, hence the tiny ridge.
  Vector grad;
  double f = objective(x, y, n_classes, c_, theta, &grad);
  iterations_ = 0;
  for (; iterations_ < kMaxNewtonIterations && grad.lpNorm<Eigen::Infinity>() > tol_; ++iterations_) {
    Matrix h = hessian(x, n_classes, c_, theta);
    h.diagonal().array() += 1e-10;
    const Vector step = h.ldlt().solve(grad);
    const double slope = grad.dot(step);
    double t = 1.0;
    Vector trial;
    Vector trial_grad;
    double trial_f = f;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial = theta - t * step;
      trial_f = objective(x, y, n_classes, c_, trial, &trial_grad);
      if (trial_f <= f - 1e-4 * t * slope) {
        moved = true;
        break;
      }
      // Near the optimum f stops resolving the decrease; accept any step
      // that still shrinks the gradient.
      if (trial_f <= f + 1e-12 * std::fabs(f) &&
          trial_grad.lpNorm<Eigen::Infinity>() < grad.lpNorm<Eigen::Infinity>()) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    theta = trial;
    f = trial_f;
    grad = trial_grad;
  }
  grad_norm_ = grad.lpNorm<Eigen::Infinity>();
  w_ = Eigen::Map<const Matrix>(theta.data(), n_classes, d);
  b_ = theta.tail(n_classes);
}

Matrix LogisticRegression::scores(const Matrix& x) const {
  if (x.cols() != w_.cols()) throw DataError("logistic regression input has the wrong number of features");
  return softmax(x, w_, b_);
}

nlohmann::json LogisticRegression::to_json() const {
  return {{"kind", to_string(kind())}, {"c", c_}, {"tol", tol_}, {"weights", matrix_to_json(w_)},
          {"intercept", vector_to_json(b_)}, {"gradient_max_norm", grad_norm_}};
}

std::unique_ptr<LogisticRegression> LogisticRegression::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<LogisticRegression>(j.at("c").get<double>(), j.value("tol", 1e-6));
  m->w_ = matrix_from_json(j.at("weights"));
  m->b_ = vector_from_json(j.at("intercept"));
  m->grad_norm_ = j.value("gradient_max_norm", 0.0);
  if (m->b_.size() != m->w_.rows()) throw DataError("logistic regression parameters have inconsistent shapes");
  return m;
}

std::array<double, 10> LogisticRegressionCV::grid() {
  std::array<double, 10> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(10.0, -4.0 + 8.0 * static_cast<double>(i) / 9.0);
  return out;
}

void LogisticRegressionCV::fit(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  const auto folds = stratified_folds(y, n_classes, 5, seed_);
  cv_scores_.clear();
  double best = -1.0;
  double best_c = 1.0;
  for (double c : grid()) {
    double total = 0.0;
    for (const auto& test : folds) {
      const auto train = complement(test, y.size());
      LogisticRegression m(c);
      m.fit(take_rows(x, train), take(y, train), n_classes);
      total += accuracy(take(y, test), m.predict(take_rows(x, test)));
    }
    const double score = total / static_cast<double>(folds.size());
    cv_scores_.push_back(score);
    if (score > best) {
      best = score;
      best_c = c;
    }
  }
  model_ = LogisticRegression(best_c);
  model_.fit(x, y, n_classes);
}

nlohmann::json LogisticRegressionCV::to_json() const {
  nlohmann::json j = model_.to_json();
  j["kind"] = to_string(kind());
  j["seed"] = seed_;
  j["cv_scores"] = cv_scores_;
  return j;
}

std::unique_ptr<LogisticRegressionCV> LogisticRegressionCV::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<LogisticRegressionCV>(j.value("seed", std::uint64_t{0}));
  m->model_ = *LogisticRegression::from_json(j);
  m->cv_scores_ = j.value("cv_scores", std::vector<double>{});
  return m;
}

void LinearDiscriminant::fit(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  const Eigen::Index d = x.cols();
  const Eigen::Index n = x.rows();
  Matrix means = Matrix::Zero(n_classes, d);
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    means.row(y[static_cast<std::size_t>(i)]) += x.row(i);
    counts[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += 1.0;
  }
  int present = 0;
  for (int c = 0; c < n_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      means.row(c) /= counts[static_cast<std::size_t>(c)];
      ++present;
    }
  }
  Matrix cov = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd r = x.row(i) - means.row(y[static_cast<std::size_t>(i)]);
    cov.noalias() += r.transpose() * r;
  }
  cov /= static_cast<double>(std::max<Eigen::Index>(1, n - present));
  cov.diagonal().array() += kDiscriminantJitter;
  const Eigen::LDLT<Matrix> solver(cov);
  coef_ = solver.solve(means.transpose()).transpose();
  intercept_.resize(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const double nc = counts[static_cast<std::size_t>(c)];
    intercept_[c] = nc > 0 ? -0.5 * coef_.row(c).dot(means.row(c)) + std::log(nc / static_cast<double>(n)) : kNegInf;
  }
}

Matrix LinearDiscriminant::scores(const Matrix& x) const {
  if (x.cols() != coef_.cols()) throw DataError("LDA input has the wrong number of features");
  Matrix s = x * coef_.transpose();
  s.rowwise() += intercept_.transpose();
  return s;
}

nlohmann::json LinearDiscriminant::to_json() const {
  nlohmann::json b = nlohmann::json::array();
  for (Eigen::Index i = 0; i < intercept_.size(); ++i) {
    b.push_back(std::isinf(intercept_[i]) ? nlohmann::json(nullptr) : nlohmann::json(intercept_[i]));
  }
  return {{"kind", to_string(kind())}, {"coef", matrix_to_json(coef_)}, {"intercept", b}};
}

std::unique_ptr<LinearDiscriminant> LinearDiscriminant::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<LinearDiscriminant>();
  m->coef_ = matrix_from_json(j.at("coef"));
  const auto& b = j.at("intercept");
  m->intercept_.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) m->intercept_[static_cast<Eigen::Index>(i)] = b[i].is_null() ? kNegInf : b[i].get<double>();
  if (m->intercept_.size() != m->coef_.rows()) throw DataError("LDA parameters have inconsistent shapes");
  return m;
}

void QuadraticDiscriminant::fit(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  const Eigen::Index d = x.cols();
  means_.assign(static_cast<std::size_t>(n_classes), Vector::Zero(d));
  covs_.assign(static_cast<std::size_t>(n_classes), Matrix::Zero(d, d));
  log_priors_.assign(static_cast<std::size_t>(n_classes), kNegInf);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n_classes));
  for (Eigen::Index i = 0; i < x.rows(); ++i) members[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])].push_back(i);
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& rows = members[c];
    if (rows.empty()) continue;
    for (Eigen::Index i : rows) means_[c] += x.row(i).transpose();
    means_[c] /= static_cast<double>(rows.size());
    for (Eigen::Index i : rows) {
      const Vector r = x.row(i).transpose() - means_[c];
      covs_[c].noalias() += r * r.transpose();
    }
    if (rows.size() > 1) covs_[c] /= static_cast<double>(rows.size() - 1);
    covs_[c].diagonal().array() += kDiscriminantJitter;
    log_priors_[c] = std::log(static_cast<double>(rows.size()) / static_cast<double>(x.rows()));
  }
  prepare();
}

void QuadraticDiscriminant::prepare() {
  chol_.clear();
  log_dets_.clear();
  for (const Matrix& cov : covs_) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw StatisticError("QDA class covariance is not positive definite");
    Matrix l = llt.matrixL();
    log_dets_.push_back(2.0 * l.diagonal().array().log().sum());
    chol_.push_back(std::move(l));
  }
}

Matrix QuadraticDiscriminant::scores(const Matrix& x) const {
  const Eigen::Index k = static_cast<Eigen::Index>(means_.size());
  if (k == 0 || x.cols() != means_.front().size()) throw DataError("QDA input has the wrong number of features");
  Matrix s(x.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    if (std::isinf(log_priors_[cc])) {
      s.col(c).setConstant(std::numeric_limits<double>::lowest());
      continue;
    }
    const Matrix centered = (x.rowwise() - means_[cc].transpose()).transpose();
    const Matrix z = chol_[cc].triangularView<Eigen::Lower>().solve(centered);
    s.col(c) = (-0.5 * z.colwise().squaredNorm().array() - 0.5 * log_dets_[cc] + log_priors_[cc]).transpose();
  }
  return s;
}

nlohmann::json QuadraticDiscriminant::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < means_.size(); ++c) {
    classes.push_back({{"mean", vector_to_json(means_[c])},
                       {"cov", matrix_to_json(covs_[c])},
                       {"log_prior", std::isinf(log_priors_[c]) ? nlohmann::json(nullptr) : nlohmann::json(log_priors_[c])}});
  }
  return {{"kind", to_string(kind())}, {"classes", classes}};
}

std::unique_ptr<QuadraticDiscriminant> QuadraticDiscriminant::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<QuadraticDiscriminant>();
  for (const auto& c : j.at("classes")) {
    m->means_.push_back(vector_from_json(c.at("mean")));
    m->covs_.push_back(matrix_from_json(c.at("cov")));
    m->log_priors_.push_back(c.at("log_prior").is_null() ? kNegInf : c.at("log_prior").get<double>());
  }
  m->prepare();
  return m;
}

}  // namespace cefr::ml
