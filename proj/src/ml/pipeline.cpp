#include "cefr/ml/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <tuple>

#include "cefr/error.hpp"
#include "cefr/ml/folds.hpp"
#include "cefr/parallel.hpp"
#include "cefr/random.hpp"

namespace cefr::ml {
namespace {

constexpr std::string_view kModelFormat = "cefr-model/1";

FeatureMatrix take_matrix_rows(const FeatureMatrix& m, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.feature_ids = m.feature_ids;
  out.catalog_hash = m.catalog_hash;
  out.rows.reserve(idx.size());
  for (std::size_t i : idx) out.rows.push_back(m.rows[i]);
  return out;
}

std::vector<std::size_t> column_indices(const FeatureMatrix& m, const std::vector<std::string>& ids) {
  std::vector<std::size_t> cols;
  cols.reserve(ids.size());
  for (const auto& id : ids) cols.push_back(m.require_column(id));
  return cols;
}

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

double metric_of(Metric metric, const Labels& truth, const Labels& pred) {
  if (metric == Metric::kAccuracy) return accuracy(truth, pred);
  return score_predictions(truth, pred, {}).balanced_accuracy;
}

nlohmann::json mean_sd_json(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

}  // namespace

std::string_view to_string(FeaturePool p) { return p == FeaturePool::kRelevantOnly ? "relevant_only" : "all"; }

std::string_view to_string(SelectorKind s) { return s == SelectorKind::kUnivariate ? "univariate" : "sequential"; }

std::string PipelineSpec::name() const {
  std::string out = pool == FeaturePool::kRelevantOnly ? "rel-" : "all-";
  out += to_string(classifier);
  out += selector == SelectorKind::kUnivariate ? "-kbest-" : "-sfs-";
  out += (selector == SelectorKind::kSequential && k == 0) ? std::string("auto") : std::to_string(k);
  return out;
}

nlohmann::json PipelineSpec::to_json() const {
  return {{"name", name()},
          {"feature_pool", to_string(pool)},
          {"selector", to_string(selector)},
          {"k", k},
          {"classifier", to_string(classifier)},
          {"seed", seed}};
}

PipelineSpec PipelineSpec::from_json(const nlohmann::json& j) {
  try {
    PipelineSpec s;
    if (!j.contains("seed")) throw ConfigError("pipeline spec needs a seed");
    s.seed = j.at("seed").get<std::uint64_t>();
    const std::string pool = j.value("feature_pool", "all");
    if (pool == "relevant_only") s.pool = FeaturePool::kRelevantOnly;
    else if (pool == "all") s.pool = FeaturePool::kAll;
    else throw ConfigError("unknown feature_pool '" + pool + "'");
    const std::string sel = j.value("selector", "univariate");
    if (sel == "univariate") s.selector = SelectorKind::kUnivariate;
    else if (sel == "sequential") s.selector = SelectorKind::kSequential;
    else throw ConfigError("unknown selector '" + sel + "'");
    s.k = j.value("k", std::size_t{0});
    if (s.selector == SelectorKind::kUnivariate && s.k < 1) throw ConfigError("univariate selection needs k >= 1");
    s.classifier = parse_classifier(j.at("classifier").get<std::string>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed pipeline spec: ") + e.what());
  }
}

PipelineSpec PipelineSpec::parse(std::string_view name, std::uint64_t seed) {
  const std::string text(name);
  auto bad = [&] { return ConfigError("cannot parse pipeline name '" + text + "'"); };
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, '-');) parts.push_back(p);
  if (parts.size() != 4) throw bad();
  PipelineSpec s;
  s.seed = seed;
  if (parts[0] == "rel") s.pool = FeaturePool::kRelevantOnly;
  else if (parts[0] == "all") s.pool = FeaturePool::kAll;
  else throw bad();
  s.classifier = parse_classifier(parts[1]);
  if (parts[2] == "kbest") s.selector = SelectorKind::kUnivariate;
  else if (parts[2] == "sfs") s.selector = SelectorKind::kSequential;
  else throw bad();
  if (parts[3] == "auto" && s.selector == SelectorKind::kSequential) {
    s.k = 0;
  } else {
    try {
      std::size_t used = 0;
      s.k = std::stoul(parts[3], &used);
      if (used != parts[3].size() || s.k == 0) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  return s;
}

std::vector<PipelineSpec> expand_grid(const nlohmann::json& grid, std::uint64_t default_seed) {
  try {
    const std::uint64_t seed = grid.value("seed", default_seed);
    std::vector<PipelineSpec> out;
    if (grid.contains("specs")) {
      for (const auto& s : grid.at("specs")) {
        if (s.is_string()) {
          out.push_back(PipelineSpec::parse(s.get<std::string>(), seed));
        } else {
          nlohmann::json obj = s;
          if (!obj.contains("seed")) obj["seed"] = seed;
          out.push_back(PipelineSpec::from_json(obj));
        }
      }
    } else {
      const auto pools = grid.value("pools", std::vector<std::string>{"all"});
      const auto classifiers = grid.at("classifiers").get<std::vector<std::string>>();
      const auto uk = grid.value("univariate_k", std::vector<std::size_t>{});
      const auto sk = grid.value("sequential_k", std::vector<std::size_t>{});
      for (const auto& p : pools) {
        for (const auto& c : classifiers) {
          for (std::size_t k : uk) {
            out.push_back(PipelineSpec::from_json(
                {{"feature_pool", p}, {"selector", "univariate"}, {"k", k}, {"classifier", c}, {"seed", seed}}));
          }
          for (std::size_t k : sk) {
            out.push_back(PipelineSpec::from_json(
                {{"feature_pool", p}, {"selector", "sequential"}, {"k", k}, {"classifier", c}, {"seed", seed}}));
          }
        }
      }
    }
    if (out.empty()) throw ConfigError("pipeline grid is empty");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed pipeline grid: ") + e.what());
  }
}

std::vector<std::string> pool_ids(const FeatureMatrix& matrix, FeaturePool pool,
                                  const std::vector<std::string>* relevant_ids) {
  if (pool == FeaturePool::kAll) return matrix.feature_ids;
  if (relevant_ids == nullptr) throw ConfigError("the relevant-only pool needs a relevance report");
  const std::set<std::string> keep(relevant_ids->begin(), relevant_ids->end());
  std::vector<std::string> out;
  for (const auto& id : matrix.feature_ids) {
    if (keep.contains(id)) out.push_back(id);
  }
  if (out.empty()) throw DataError("no relevant features are present in the matrix");
  return out;
}

std::vector<double> imputation_means(const FeatureMatrix& matrix, const std::vector<std::string>& ids) {
  const auto cols = column_indices(matrix, ids);
  std::vector<double> out;
  out.reserve(cols.size());
  for (std::size_t j : cols) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : matrix.rows) {
      if (row.is_degenerate(j)) continue;
      sum += row.values[j];
      ++n;
    }
    out.push_back(n > 0 ? sum / static_cast<double>(n) : 0.0);
  }
  return out;
}

Matrix design_matrix(const FeatureMatrix& matrix, const std::vector<std::string>& ids,
                     const std::vector<double>& means) {
  const auto cols = column_indices(matrix, ids);
  if (means.size() != cols.size()) throw DataError("imputation means do not match the feature list");
  Matrix x(static_cast<Eigen::Index>(matrix.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    const auto& row = matrix.rows[i];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::size_t j = cols[c];
      const double v = row.is_degenerate(j) ? means[c] : row.values[j];
      if (!std::isfinite(v)) throw DataError("non-finite value of '" + ids[c] + "' in document " + row.doc_id);
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return x;
}

Labels level_labels(const FeatureMatrix& matrix) {
  Labels y;
  y.reserve(matrix.rows.size());
  for (const auto& row : matrix.rows) y.push_back(ordinal(row.meta.level));
  return y;
}

std::vector<TextType> text_types(const FeatureMatrix& matrix) {
  std::vector<TextType> out;
  out.reserve(matrix.rows.size());
  for (const auto& row : matrix.rows) out.push_back(row.meta.text_type);
  return out;
}

TrainedModel train(const FeatureMatrix& matrix, const PipelineSpec& spec, const std::vector<std::string>& pool) {
  if (matrix.rows.empty()) throw DataError("no training rows");
  if (pool.empty()) throw ConfigError("empty feature pool");
  const std::vector<double> means = imputation_means(matrix, pool);
  const Matrix raw = design_matrix(matrix, pool, means);
  const Labels y = level_labels(matrix);
  const Scaler scaler = Scaler::fit(raw);
  const Matrix x = scaler.apply(raw);
  const int k = static_cast<int>(kLevelCount);

  std::vector<std::size_t> chosen;
  if (spec.selector == SelectorKind::kUnivariate) {
    chosen = select_univariate(x, y, k, spec.k);
  } else {
    chosen = select_sequential(x, y, k, spec.classifier, spec.seed, spec.k);
  }

  TrainedModel model;
  model.spec = spec;
  model.scaler = scaler.subset(chosen);
  for (std::size_t c : chosen) {
    model.features.push_back(pool[c]);
    model.impute_means.push_back(means[c]);
  }
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (model.scaler.constant[i]) model.warnings.push_back("feature '" + model.features[i] + "' is constant in training data");
  }
  auto clf = make_classifier(spec.classifier, spec.seed);
  clf->fit(take_cols(x, chosen), y, k);
  model.classifier = std::move(clf);

  const auto cols = column_indices(matrix, model.features);
  for (std::size_t c : cols) {
    std::array<double, kLevelCount> sums{};
    std::array<std::size_t, kLevelCount> counts{};
    for (const auto& row : matrix.rows) {
      if (row.is_degenerate(c)) continue;
      const auto l = static_cast<std::size_t>(ordinal(row.meta.level));
      sums[l] += row.values[c];
      ++counts[l];
    }
    std::array<double, kLevelCount> m{};
    for (std::size_t l = 0; l < kLevelCount; ++l) m[l] = counts[l] > 0 ? sums[l] / static_cast<double>(counts[l]) : 0.0;
    model.level_means.push_back(m);
  }
  model.catalog_hash = matrix.catalog_hash;
  return model;
}

Matrix TrainedModel::scores(const FeatureMatrix& matrix) const {
  if (!classifier) throw DataError("model has no classifier");
  return classifier->scores(scaler.apply(design_matrix(matrix, features, impute_means)));
}

Labels TrainedModel::predict(const FeatureMatrix& matrix) const {
  if (!classifier) throw DataError("model has no classifier");
  return classifier->predict(scaler.apply(design_matrix(matrix, features, impute_means)));
}

int TrainedModel::predict_row(const FeatureMatrix& matrix, std::size_t row) const {
  return predict(take_matrix_rows(matrix, {row})).front();
}

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json means = nlohmann::json::array();
  for (const auto& m : level_means) means.push_back(m);
  nlohmann::json levels = nlohmann::json::array();
  for (Level l : kLevels) levels.push_back(to_string(l));
  nlohmann::json j = {{"format", kModelFormat},
                      {"spec", spec.to_json()},
                      {"labels", levels},
                      {"features", features},
                      {"impute_means", impute_means},
                      {"scaler", scaler.to_json()},
                      {"level_means", means},
                      {"catalog_hash", catalog_hash},
                      {"warnings", warnings},
                      {"classifier", classifier ? classifier->to_json() : nlohmann::json(nullptr)}};
  if (trained_at) j["trained_at"] = *trained_at;
  return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw DataError("unsupported model format");
    TrainedModel m;
    m.spec = PipelineSpec::from_json(j.at("spec"));
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    if (labels.size() != kLevelCount) throw DataError("model labels must be A2, B1, B2, C1");
    for (std::size_t i = 0; i < kLevelCount; ++i) {
      if (parse_level(labels[i]) != kLevels[i]) throw DataError("model labels must be A2, B1, B2, C1");
    }
    m.features = j.at("features").get<std::vector<std::string>>();
    m.impute_means = j.at("impute_means").get<std::vector<double>>();
    m.scaler = Scaler::from_json(j.at("scaler"));
    for (const auto& row : j.at("level_means")) m.level_means.push_back(row.get<std::array<double, kLevelCount>>());
    m.catalog_hash = j.at("catalog_hash").get<std::string>();
    m.warnings = j.value("warnings", std::vector<std::string>{});
    if (j.contains("trained_at")) m.trained_at = j.at("trained_at").get<std::string>();
    m.classifier = classifier_from_json(j.at("classifier"));
    const std::size_t d = m.features.size();
    if (m.impute_means.size() != d || static_cast<std::size_t>(m.scaler.mean.size()) != d || m.level_means.size() != d) {
      throw DataError("model vectors do not match its feature list");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model: ") + e.what());
  }
}

nlohmann::json CvReport::to_json() const {
  return {{"spec", spec.to_json()},
          {"fold_accuracy", fold_accuracy},
          {"fold_macro_precision", fold_macro_precision},
          {"fold_macro_recall", fold_macro_recall},
          {"fold_macro_f1", fold_macro_f1},
          {"fold_feature_count", fold_feature_count},
          {"accuracy", mean_sd_json(accuracy)},
          {"macro_precision", mean_sd_json(macro_precision)},
          {"macro_recall", mean_sd_json(macro_recall)},
          {"macro_f1", mean_sd_json(macro_f1)},
          {"feature_count", feature_count}};
}

CvReport cross_validate(const FeatureMatrix& matrix, const PipelineSpec& spec, const std::vector<std::string>& pool,
                        std::size_t folds) {
  const Labels y = level_labels(matrix);
  for (std::size_t l = 0; l < kLevelCount; ++l) {
    const auto n = static_cast<std::size_t>(std::count(y.begin(), y.end(), static_cast<int>(l)));
    if (n < folds) {
      throw DataError("level " + std::string(to_string(kLevels[l])) + " has " + std::to_string(n) +
                      " rows, fewer than the " + std::to_string(folds) + " folds");
    }
  }
  const auto parts = stratified_folds(y, static_cast<int>(kLevelCount), folds, spec.seed);
  CvReport r;
  r.spec = spec;
  for (const auto& test : parts) {
    const auto train_idx = complement(test, y.size());
    const TrainedModel model = train(take_matrix_rows(matrix, train_idx), spec, pool);
    const FeatureMatrix held = take_matrix_rows(matrix, test);
    const EvalReport e = score_predictions(level_labels(held), model.predict(held), {});
    r.fold_accuracy.push_back(e.accuracy);
    r.fold_macro_precision.push_back(e.macro_precision.mean);
    r.fold_macro_recall.push_back(e.macro_recall.mean);
    r.fold_macro_f1.push_back(e.macro_f1.mean);
    r.fold_feature_count.push_back(model.features.size());
  }
  r.accuracy = mean_sd(r.fold_accuracy);
  r.macro_precision = mean_sd(r.fold_macro_precision);
  r.macro_recall = mean_sd(r.fold_macro_recall);
  r.macro_f1 = mean_sd(r.fold_macro_f1);
  if (spec.selector == SelectorKind::kSequential && spec.k == 0) {
    const double total = std::accumulate(r.fold_feature_count.begin(), r.fold_feature_count.end(), 0.0);
    r.feature_count = static_cast<std::size_t>(std::lround(total / static_cast<double>(parts.size())));
  } else {
    r.feature_count = spec.k;
  }
  return r;
}

std::vector<CvReport> rank_pipelines(const FeatureMatrix& matrix, const std::vector<PipelineSpec>& grid,
                                     const std::vector<std::string>* relevant_ids, const RankingOptions& options) {
  if (grid.empty()) throw ConfigError("pipeline grid is empty");
  std::vector<std::vector<std::string>> pools(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    pools[i] = pool_ids(matrix, grid[i].pool, relevant_ids);
    if (grid[i].k > pools[i].size()) {
      throw ConfigError(grid[i].name() + ": k exceeds the pool of " + std::to_string(pools[i].size()) + " features");
    }
  }
  std::vector<CvReport> reports(grid.size());
  parallel_for(grid.size(), options.threads,
               [&](std::size_t i) { reports[i] = cross_validate(matrix, grid[i], pools[i], options.folds); });

  auto better = [](const CvReport& a, const CvReport& b) {
    if (a.accuracy.mean != b.accuracy.mean) return a.accuracy.mean > b.accuracy.mean;
    if (a.feature_count != b.feature_count) return a.feature_count < b.feature_count;
    return a.spec.name() < b.spec.name();
  };
  std::map<std::tuple<FeaturePool, SelectorKind, ClassifierKind>, CvReport> best;
  for (const auto& r : reports) {
    const auto key = std::make_tuple(r.spec.pool, r.spec.selector, r.spec.classifier);
    auto it = best.find(key);
    if (it == best.end()) best.emplace(key, r);
    else if (better(r, it->second)) it->second = r;
  }
  std::vector<CvReport> out;
  for (auto& [key, r] : best) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(), better);
  if (out.size() > options.top) out.resize(options.top);
  return out;
}

std::string render_ranking(const std::vector<CvReport>& ranking) {
  std::ostringstream out;
  out << pad("rank", 6) << pad("pipeline", 26) << pad("features", 10) << pad("accuracy", 16) << pad("precision", 16)
      << pad("recall", 16) << "f1\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const CvReport& r = ranking[i];
    auto cell = [](const MeanSd& m) { return fixed(m.mean) + " (" + fixed(m.sd) + ")"; };
    out << pad(std::to_string(i + 1), 6) << pad(r.spec.name(), 26) << pad(std::to_string(r.feature_count), 10)
        << pad(cell(r.accuracy), 16) << pad(cell(r.macro_precision), 16) << pad(cell(r.macro_recall), 16)
        << cell(r.macro_f1) << "\n";
  }
  out << "mean (sample SD) over folds\n";
  return out.str();
}

EvalReport evaluate(const TrainedModel& model, const FeatureMatrix& matrix) {
  if (matrix.rows.empty()) throw DataError("no rows to evaluate");
  for (const auto& row : matrix.rows) {
    if (row.meta.split == Split::kUnlabeled) throw DataError("document " + row.doc_id + " is unlabeled");
  }
  return score_predictions(level_labels(matrix), model.predict(matrix), text_types(matrix));
}

std::string_view to_string(Metric m) { return m == Metric::kAccuracy ? "accuracy" : "balanced_accuracy"; }

Metric parse_metric(std::string_view s) {
  if (s == "accuracy") return Metric::kAccuracy;
  if (s == "balanced_accuracy") return Metric::kBalancedAccuracy;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

ImportanceReport permutation_importance(const TrainedModel& model, const FeatureMatrix& matrix, Metric metric,
                                        std::size_t repeats, std::uint64_t seed) {
  if (!model.classifier) throw DataError("model has no classifier");
  if (matrix.rows.empty()) throw DataError("no rows for permutation importance");
  if (repeats < 1) throw ConfigError("permutation importance needs at least one repeat");
  const Matrix x = model.scaler.apply(design_matrix(matrix, model.features, model.impute_means));
  const Labels y = level_labels(matrix);
  ImportanceReport r;
  r.metric = metric;
  r.repeats = repeats;
  r.seed = seed;
  r.baseline = metric_of(metric, y, model.classifier->predict(x));
  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  for (std::size_t f = 0; f < model.features.size(); ++f) {
    FeatureImportance fi;
    fi.feature = model.features[f];
    Matrix shuffled = x;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      Rng rng(derive_seed(derive_seed(seed, f), rep));
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span<std::size_t>(order));
      const auto col = static_cast<Eigen::Index>(f);
      for (std::size_t i = 0; i < order.size(); ++i) shuffled(static_cast<Eigen::Index>(i), col) = x(static_cast<Eigen::Index>(order[i]), col);
      fi.drops.push_back(r.baseline - metric_of(metric, y, model.classifier->predict(shuffled)));
    }
    const MeanSd ms = mean_sd(fi.drops);
    fi.mean_drop = ms.mean;
    fi.sd_drop = ms.sd;
    r.features.push_back(std::move(fi));
  }
  return r;
}

nlohmann::json ImportanceReport::to_json() const {
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : features) {
    feats.push_back({{"feature", f.feature}, {"mean_drop", f.mean_drop}, {"sd_drop", f.sd_drop}, {"drops", f.drops}});
  }
  return {{"metric", to_string(metric)}, {"repeats", repeats}, {"seed", seed}, {"baseline", baseline}, {"features", feats}};
}

std::string ImportanceReport::render_table() const {
  std::vector<const FeatureImportance*> sorted;
  for (const auto& f : features) sorted.push_back(&f);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FeatureImportance* a, const FeatureImportance* b) { return a->mean_drop > b->mean_drop; });
  std::ostringstream out;
  out << "baseline " << to_string(metric) << " " << fixed(baseline) << ", " << repeats << " repeats\n";
  out << pad("feature", 44) << pad("mean drop", 12) << "SD\n";
  for (const auto* f : sorted) out << pad(f->feature, 44) << pad(fixed(f->mean_drop, 4), 12) << fixed(f->sd_drop, 4) << "\n";
  return out.str();
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model.to_json().dump(1) + "\n");
}

TrainedModel load_model(const std::filesystem::path& path, const std::string& expected_hash) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  TrainedModel m = TrainedModel::from_json(j);
  if (!expected_hash.empty() && m.catalog_hash != expected_hash) {
    throw DataError("model " + path.string() + " was trained under catalog " + m.catalog_hash +
                    " but the active catalog is " + expected_hash);
  }
  return m;
}

}  // namespace cefr::ml
