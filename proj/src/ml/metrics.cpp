#include "cefr/ml/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "cefr/error.hpp"

namespace cefr::ml {
namespace {

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

nlohmann::json mean_sd_json(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

}  // namespace

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  if (values.empty()) return out;
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

EvalReport score_predictions(const Labels& truth, const Labels& pred, const std::vector<TextType>& types) {
  if (truth.size() != pred.size() || (!types.empty() && types.size() != truth.size())) {
    throw DataError("truth, predictions and text types differ in length");
  }
  EvalReport r;
  r.n = truth.size();
  std::size_t hit = 0;
  std::size_t near = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = pred[i];
    if (t < 0 || p < 0 || t >= static_cast<int>(kLevelCount) || p >= static_cast<int>(kLevelCount)) {
      throw DataError("level index out of range");
    }
    ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    hit += t == p ? 1 : 0;
    near += std::abs(t - p) <= 1 ? 1 : 0;
  }
  if (r.n > 0) {
    r.accuracy = static_cast<double>(hit) / static_cast<double>(r.n);
    r.within_one_level_accuracy = static_cast<double>(near) / static_cast<double>(r.n);
  }
  std::vector<double> ps;
  std::vector<double> rs;
  std::vector<double> fs;
  for (std::size_t c = 0; c < kLevelCount; ++c) {
    std::size_t support = 0;
    std::size_t predicted = 0;
    for (std::size_t k = 0; k < kLevelCount; ++k) {
      support += r.confusion[c][k];
      predicted += r.confusion[k][c];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    ClassMetrics& m = r.per_class[c];
    m.support = support;
    m.precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    m.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (support > 0) {
      ps.push_back(m.precision);
      rs.push_back(m.recall);
      fs.push_back(m.f1);
    }
  }
  r.macro_precision = mean_sd(ps);
  r.macro_recall = mean_sd(rs);
  r.macro_f1 = mean_sd(fs);
  r.balanced_accuracy = r.macro_recall.mean;

  if (!types.empty()) {
    std::map<TextType, std::pair<std::size_t, std::size_t>> by_type;
    std::map<std::pair<Level, TextType>, std::pair<std::size_t, std::size_t>> by_cell;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool ok = truth[i] == pred[i];
      auto& a = by_type[types[i]];
      a.first += ok ? 1 : 0;
      ++a.second;
      auto& b = by_cell[{kLevels[static_cast<std::size_t>(truth[i])], types[i]}];
      b.first += ok ? 1 : 0;
      ++b.second;
    }
    for (const auto& [t, c] : by_type) r.per_text_type_recall[t] = static_cast<double>(c.first) / static_cast<double>(c.second);
    for (const auto& [k, c] : by_cell) r.per_level_text_type_recall[k] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < kLevelCount; ++c) {
    classes[std::string(to_string(kLevels[c]))] = {{"precision", per_class[c].precision},
                                                   {"recall", per_class[c].recall},
                                                   {"f1", per_class[c].f1},
                                                   {"support", per_class[c].support}};
  }
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [t, v] : per_text_type_recall) types[std::string(to_string(t))] = v;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [k, v] : per_level_text_type_recall) {
    cells.push_back({{"level", to_string(k.first)}, {"text_type", to_string(k.second)}, {"recall", v}});
  }
  return {{"n", n},
          {"accuracy", accuracy},
          {"balanced_accuracy", balanced_accuracy},
          {"within_one_level_accuracy", within_one_level_accuracy},
          {"per_class", classes},
          {"macro_precision", mean_sd_json(macro_precision)},
          {"macro_recall", mean_sd_json(macro_recall)},
          {"macro_f1", mean_sd_json(macro_f1)},
          {"sd_form", "sample"},
          {"confusion_matrix", confusion},
          {"per_text_type_recall", types},
          {"per_level_text_type_recall", cells}};
}

std::string EvalReport::render_table(const std::string& title) const {
  std::ostringstream out;
  if (!title.empty()) out << title << "\n";
  out << "n = " << n << "  accuracy " << fixed(accuracy) << "  balanced accuracy " << fixed(balanced_accuracy)
      << "  within one level " << fixed(within_one_level_accuracy) << "\n\n";
  out << pad("level", 8) << pad("precision", 11) << pad("recall", 9) << pad("f1", 9) << "support\n";
  for (std::size_t c = 0; c < kLevelCount; ++c) {
    out << pad(std::string(to_string(kLevels[c])), 8) << pad(fixed(per_class[c].precision), 11)
        << pad(fixed(per_class[c].recall), 9) << pad(fixed(per_class[c].f1), 9) << per_class[c].support << "\n";
  }
  out << pad("macro", 8) << pad(fixed(macro_precision.mean), 11) << pad(fixed(macro_recall.mean), 9)
      << pad(fixed(macro_f1.mean), 9) << "\n";
  out << pad("SD", 8) << pad(fixed(macro_precision.sd), 11) << pad(fixed(macro_recall.sd), 9)
      << pad(fixed(macro_f1.sd), 9) << "(sample)\n\n";
  out << "confusion (rows = truth)\n" << pad("", 8);
  for (Level l : kLevels) out << pad(std::string(to_string(l)), 6);
  out << "\n";
  for (std::size_t c = 0; c < kLevelCount; ++c) {
    out << pad(std::string(to_string(kLevels[c])), 8);
    for (std::size_t k = 0; k < kLevelCount; ++k) out << pad(std::to_string(confusion[c][k]), 6);
    out << "\n";
  }
  if (!per_level_text_type_recall.empty()) {
    out << "\nrecall per text type\n" << pad("", 20);
    for (Level l : kLevels) out << pad(std::string(to_string(l)), 8);
    out << "all\n";
    for (const auto& [t, all] : per_text_type_recall) {
      out << pad(std::string(to_string(t)), 20);
      for (Level l : kLevels) {
        const auto it = per_level_text_type_recall.find({l, t});
        out << pad(it == per_level_text_type_recall.end() ? "-" : fixed(it->second), 8);
      }
      out << fixed(all) << "\n";
    }
  }
  return out.str();
}

}  // namespace cefr::ml
