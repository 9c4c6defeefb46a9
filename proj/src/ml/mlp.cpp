#include "cefr/ml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "cefr/error.hpp"
#include "cefr/ml/folds.hpp"
#include "cefr/random.hpp"

namespace cefr::ml {
namespace {

Matrix forward_hidden(const Mlp::Params& p, const Matrix& x) {
  Matrix h = x * p.w1;
  h.rowwise() += p.b1.transpose();
  return h.cwiseMax(0.0);
}

Matrix softmax_rows(Matrix z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

}  // namespace

Vector Mlp::Params::pack() const {
  Vector theta(w1.size() + b1.size() + w2.size() + b2.size());
  Eigen::Index o = 0;
  theta.segment(o, w1.size()) = Eigen::Map<const Vector>(w1.data(), w1.size());
  o += w1.size();
  theta.segment(o, b1.size()) = b1;
  o += b1.size();
  theta.segment(o, w2.size()) = Eigen::Map<const Vector>(w2.data(), w2.size());
  o += w2.size();
  theta.segment(o, b2.size()) = b2;
  return theta;
}

Mlp::Params Mlp::Params::unpack(const Vector& theta, Eigen::Index d, Eigen::Index hidden, Eigen::Index classes) {
  Params p;
  Eigen::Index o = 0;
  p.w1 = Eigen::Map<const Matrix>(theta.data() + o, d, hidden);
  o += d * hidden;
  p.b1 = theta.segment(o, hidden);
  o += hidden;
  p.w2 = Eigen::Map<const Matrix>(theta.data() + o, hidden, classes);
  o += hidden * classes;
  p.b2 = theta.segment(o, classes);
  return p;
}

double Mlp::loss(const Params& p, const Matrix& x, const Labels& y, double alpha, Vector* grad) {
  const double n = static_cast<double>(x.rows());
  const Matrix h = forward_hidden(p, x);
  Matrix z = h * p.w2;
  z.rowwise() += p.b2.transpose();
  const Matrix prob = softmax_rows(z);
  double ce = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    ce -= std::log(std::max(prob(i, y[static_cast<std::size_t>(i)]), 1e-300));
  }
  const double value = ce / n + 0.5 * alpha * (p.w1.squaredNorm() + p.w2.squaredNorm()) / n;
  if (grad != nullptr) {
    Matrix dz = prob;
    for (Eigen::Index i = 0; i < x.rows(); ++i) dz(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    dz /= n;
    Params g;
    g.w2 = h.transpose() * dz + alpha * p.w2 / n;
    g.b2 = dz.colwise().sum().transpose();
    const Matrix dh = (dz * p.w2.transpose()).cwiseProduct((h.array() > 0.0).cast<double>().matrix());
    g.w1 = x.transpose() * dh + alpha * p.w1 / n;
    g.b1 = dh.colwise().sum().transpose();
    *grad = g.pack();
  }
  return value;
}

Mlp::Params Mlp::initialise(Eigen::Index d, Eigen::Index hidden, Eigen::Index classes, std::uint64_t seed) {
  Rng rng(seed);
  auto uniform_fill = [&rng](Eigen::Index rows, Eigen::Index cols, double bound) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
    }
    return m;
  };
  Params p;
  const double b1 = std::sqrt(6.0 / static_cast<double>(d + hidden));
  p.w1 = uniform_fill(d, hidden, b1);
  p.b1 = uniform_fill(hidden, 1, b1);
  const double b2 = std::sqrt(6.0 / static_cast<double>(hidden + classes));
  p.w2 = uniform_fill(hidden, classes, b2);
  p.b2 = uniform_fill(classes, 1, b2);
  return p;
}

void Mlp::fit(const Matrix& x, const Labels& y, int n_classes) {
  check_training_data(x, y, n_classes);
  const auto n = static_cast<std::size_t>(x.rows());
  params_ = initialise(x.cols(), options_.hidden, n_classes, derive_seed(seed_, 0));
  Rng rng(derive_seed(seed_, 1));
  Vector theta = params_.pack();
  Vector m = Vector::Zero(theta.size());
  Vector v = Vector::Zero(theta.size());
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(options_.batch_size), n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  long step = 0;
  loss_curve_.clear();
  for (epochs_ = 0; epochs_ < options_.max_epochs;) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      Vector grad;
      const Params p = Params::unpack(theta, x.cols(), options_.hidden, n_classes);
      total += loss(p, take_rows(x, idx), take(y, idx), options_.alpha, &grad) * static_cast<double>(idx.size());
      ++step;
      m = options_.beta1 * m + (1.0 - options_.beta1) * grad;
      v = options_.beta2 * v + (1.0 - options_.beta2) * grad.cwiseProduct(grad);
      const double lr = options_.learning_rate * std::sqrt(1.0 - std::pow(options_.beta2, static_cast<double>(step))) /
                        (1.0 - std::pow(options_.beta1, static_cast<double>(step)));
      theta.array() -= lr * m.array() / (v.array().sqrt() + options_.epsilon);
    }
    ++epochs_;
    const double epoch_loss = total / static_cast<double>(n);
    loss_curve_.push_back(epoch_loss);
    stale = epoch_loss > best - options_.tol ? stale + 1 : 0;
    best = std::min(best, epoch_loss);
    if (stale > options_.patience) break;
  }
  params_ = Params::unpack(theta, x.cols(), options_.hidden, n_classes);
}

Matrix Mlp::scores(const Matrix& x) const {
  if (x.cols() != params_.w1.rows()) throw DataError("MLP input has the wrong number of features");
  Matrix z = forward_hidden(params_, x) * params_.w2;
  z.rowwise() += params_.b2.transpose();
  return softmax_rows(z);
}

nlohmann::json Mlp::to_json() const {
  return {{"kind", to_string(kind())},
          {"seed", seed_},
          {"hidden", options_.hidden},
          {"learning_rate", options_.learning_rate},
          {"alpha", options_.alpha},
          {"max_epochs", options_.max_epochs},
          {"batch_size", options_.batch_size},
          {"tol", options_.tol},
          {"patience", options_.patience},
          {"epochs", epochs_},
          {"w1", matrix_to_json(params_.w1)},
          {"b1", vector_to_json(params_.b1)},
          {"w2", matrix_to_json(params_.w2)},
          {"b2", vector_to_json(params_.b2)}};
}

std::unique_ptr<Mlp> Mlp::from_json(const nlohmann::json& j) {
  MlpOptions o;
  o.hidden = j.at("hidden").get<int>();
  o.learning_rate = j.at("learning_rate").get<double>();
  o.alpha = j.at("alpha").get<double>();
  o.max_epochs = j.at("max_epochs").get<int>();
  o.batch_size = j.at("batch_size").get<int>();
  o.tol = j.at("tol").get<double>();
  o.patience = j.at("patience").get<int>();
  auto m = std::make_unique<Mlp>(j.at("seed").get<std::uint64_t>(), o);
  m->epochs_ = j.value("epochs", 0);
  m->params_.w1 = matrix_from_json(j.at("w1"));
  m->params_.b1 = vector_from_json(j.at("b1"));
  m->params_.w2 = matrix_from_json(j.at("w2"));
  m->params_.b2 = vector_from_json(j.at("b2"));
  if (m->params_.w1.cols() != m->params_.w2.rows() || m->params_.b1.size() != m->params_.w1.cols() ||
      m->params_.b2.size() != m->params_.w2.cols()) {
    throw DataError("MLP parameters have inconsistent shapes");
  }
  return m;
}

}  // namespace cefr::ml
