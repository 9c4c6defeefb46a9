#include "cefr/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "cefr/error.hpp"
#include "cefr/parallel.hpp"
#include "cefr/stats/tests.hpp"

namespace cefr {
namespace {

using Json = nlohmann::json;

constexpr std::array<const char*, 3> kPairNames = {"A2-B1", "B1-B2", "B2-C1"};

int sign(double x) { return (x > 0.0) - (x < 0.0); }

LevelSummary summarize(const std::vector<double>& v) {
  LevelSummary s;
  s.n = v.size();
  s.mean = stats::mean(v);
  s.sd = v.size() >= 2 ? stats::sample_sd(v) : 0.0;
  return s;
}

// Welch ANOVA p with the zero-variance convention of the t-test: identical
// constant groups give 1, distinct constant groups give 0.
double welch_p(const stats::GroupedSample& sample) {
  try {
    return stats::welch_anova(sample).p_value;
  } catch (const StatisticError&) {
    const double first = sample.groups.front().second.front();
    for (const auto& [label, values] : sample.groups) {
      if (values.front() != first) return 0.0;
    }
    return 1.0;
  }
}

double welch_anova_f(const stats::GroupedSample& sample) {
  try {
    return stats::welch_anova(sample).statistic;
  } catch (const StatisticError&) {
    return 0.0;
  }
}

Json summary_json(const LevelSummary& s) { return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}}; }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

double AuditConfig::threshold() const {
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw ConfigError("alpha0 must lie in (0, 1)");
  if (!(bonferroni_denominator >= 1.0)) throw ConfigError("Bonferroni denominator must be at least 1");
  const double exact = alpha0 / bonferroni_denominator;
  if (!literal_threshold) return exact;
  // One significant digit, parsed back from its decimal form so that the
  // result is the double nearest to the printed value.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", exact);
  return std::strtod(buf, nullptr);
}

Json AuditConfig::to_json() const {
  Json j{{"alpha0", alpha0},
         {"bonferroni_denominator", bonferroni_denominator},
         {"literal_threshold", literal_threshold},
         {"posthoc_alpha", posthoc_alpha},
         {"min_abs_rho", min_abs_rho}};
  j["split"] = split ? Json(std::string(to_string(*split))) : Json(nullptr);
  return j;
}

AuditConfig AuditConfig::from_json(const Json& j) {
  AuditConfig c;
  try {
    c.alpha0 = j.value("alpha0", c.alpha0);
    c.bonferroni_denominator = j.value("bonferroni_denominator", c.bonferroni_denominator);
    c.literal_threshold = j.value("literal_threshold", c.literal_threshold);
    c.posthoc_alpha = j.value("posthoc_alpha", c.posthoc_alpha);
    c.min_abs_rho = j.value("min_abs_rho", c.min_abs_rho);
    if (j.contains("split")) {
      c.split = j["split"].is_null() ? std::nullopt : std::optional(parse_split(j["split"].get<std::string>()));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid audit configuration: ") + e.what());
  }
  c.threshold();
  return c;
}

Json RelevanceVerdict::to_json() const {
  Json j;
  j["feature_id"] = feature_id;
  Json lv = Json::object();
  for (Level l : kLevels) lv[std::string(to_string(l))] = summary_json(levels[ordinal(l)]);
  j["levels"] = lv;
  j["excluded_degenerate"] = excluded_degenerate;
  j["anova"] = {{"f", anova_f}, {"p", anova_p}, {"significant", anova_significant}};
  Json adj = Json::object();
  for (std::size_t a = 0; a < 3; ++a) {
    adj[kPairNames[a]] = {{"p", adjacent_p[a]}, {"significant", adjacent_significant[a]},
                          {"interfered", interfered_pairs[a]}};
  }
  j["adjacent"] = adj;
  Json pw = Json::object();
  for (std::size_t a = 0; a < kLevelCount; ++a) {
    for (std::size_t b = a + 1; b < kLevelCount; ++b) {
      pw[std::string(to_string(kLevels[a])) + "-" + std::string(to_string(kLevels[b]))] = pairwise_p[a][b];
    }
  }
  j["pairwise_p"] = pw;
  j["monotonic"] = monotonic;
  j["direction"] = direction > 0 ? "increasing" : direction < 0 ? "decreasing" : "nonmonotonic";
  j["spearman_rho"] = spearman_rho;
  Json tt = Json::array();
  for (const TextTypeTest& t : text_type_tests) {
    Json groups = Json::object();
    for (const auto& [type, s] : t.groups) groups[std::string(to_string(type))] = summary_json(s);
    tt.push_back({{"level", to_string(t.level)}, {"p", t.p_value}, {"significant", t.significant}, {"groups", groups}});
  }
  j["text_type_tests"] = tt;
  j["criteria"] = {{"adjacent_difference", criteria[0]},
                   {"monotonic", criteria[1]},
                   {"correlation", criteria[2]},
                   {"text_type", criteria[3]}};
  j["relevant"] = relevant;
  j["rationale"] = rationale;
  return j;
}

std::vector<std::string> RelevanceReport::relevant_ids() const {
  std::vector<std::string> out;
  for (const RelevanceVerdict& v : verdicts) {
    if (v.relevant) out.push_back(v.feature_id);
  }
  return out;
}

Json RelevanceReport::to_json() const {
  Json j;
  j["config"] = config.to_json();
  j["threshold"] = threshold;
  j["relevant"] = relevant_ids();
  Json arr = Json::array();
  for (const RelevanceVerdict& v : verdicts) arr.push_back(v.to_json());
  j["verdicts"] = arr;
  return j;
}

std::string RelevanceReport::render_table() const {
  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-40s %-16s %-16s %-16s %-16s %-5s %-5s %-5s %7s  %s\n", "feature", "A2", "B1", "B2",
                "C1", "A2B1", "B1B2", "B2C1", "rho", "verdict");
  os << line;
  for (const RelevanceVerdict& v : verdicts) {
    std::array<std::string, kLevelCount> cells;
    for (std::size_t l = 0; l < kLevelCount; ++l) {
      cells[l] = fmt("%.2f", v.levels[l].mean) + " (" + fmt("%.2f", v.levels[l].sd) + ")";
    }
    std::array<std::string, 3> marks;
    for (std::size_t a = 0; a < 3; ++a) {
      marks[a] = v.adjacent_significant[a] ? (v.interfered_pairs[a] ? "(x)" : "x") : "-";
    }
    const std::string verdict = v.relevant ? "relevant: " + v.rationale : v.rationale;
    std::snprintf(line, sizeof line, "%-40s %-16s %-16s %-16s %-16s %-5s %-5s %-5s %7.3f  %s\n", v.feature_id.c_str(),
                  cells[0].c_str(), cells[1].c_str(), cells[2].c_str(), cells[3].c_str(), marks[0].c_str(),
                  marks[1].c_str(), marks[2].c_str(), v.spearman_rho, verdict.c_str());
    os << line;
  }
  os << "threshold p <= " << threshold << "; x = adjacent pair distinguished, (x) = distinguished but text type "
     << "variation interferes\n";
  return os.str();
}

RelevanceVerdict audit_feature(const std::string& feature_id, const std::vector<double>& values,
                               const std::vector<DocMeta>& meta, const AuditConfig& config) {
  if (values.size() != meta.size()) throw DataError("feature '" + feature_id + "': values and labels differ in length");
  const double alpha = config.threshold();
  RelevanceVerdict v;
  v.feature_id = feature_id;

  std::array<std::vector<double>, kLevelCount> by_level;
  std::array<std::map<TextType, std::vector<double>>, kLevelCount> by_type;
  std::vector<double> all_values;
  std::vector<double> all_levels;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int l = ordinal(meta[i].level);
    by_level[l].push_back(values[i]);
    by_type[l][meta[i].text_type].push_back(values[i]);
    all_values.push_back(values[i]);
    all_levels.push_back(l);
  }
  stats::GroupedSample levels;
  for (Level l : kLevels) {
    const auto& g = by_level[ordinal(l)];
    if (g.size() < 2) {
      if (!g.empty()) v.levels[ordinal(l)] = summarize(g);
      v.rationale = "not relevant: level " + std::string(to_string(l)) + " has " + std::to_string(g.size()) +
                    " usable rows";
      continue;
    }
    v.levels[ordinal(l)] = summarize(g);
    levels.groups.emplace_back(std::string(to_string(l)), g);
  }
  if (levels.groups.size() < kLevelCount) return v;

  // Criterion 1: between-level difference plus at least one adjacent pair.
  v.anova_f = welch_anova_f(levels);
  v.anova_p = welch_p(levels);
  v.anova_significant = v.anova_p <= alpha;
  const std::vector<stats::PairwiseResult> gh = stats::games_howell(levels);
  std::size_t idx = 0;
  for (std::size_t a = 0; a < kLevelCount; ++a) {
    v.pairwise_p[a][a] = 1.0;
    for (std::size_t b = a + 1; b < kLevelCount; ++b) {
      v.pairwise_p[a][b] = v.pairwise_p[b][a] = gh[idx++].p_value;
    }
  }
  bool any_adjacent = false;
  for (std::size_t a = 0; a < 3; ++a) {
    v.adjacent_p[a] = v.pairwise_p[a][a + 1];
    v.adjacent_significant[a] = v.adjacent_p[a] <= config.posthoc_alpha;
    any_adjacent = any_adjacent || v.adjacent_significant[a];
  }
  v.criteria[0] = v.anova_significant && any_adjacent;

  // Criterion 2: strictly unidirectional level means.
  std::array<int, 3> steps{};
  for (std::size_t a = 0; a < 3; ++a) steps[a] = sign(v.levels[a + 1].mean - v.levels[a].mean);
  v.monotonic = steps[0] != 0 && steps[0] == steps[1] && steps[1] == steps[2];
  v.direction = v.monotonic ? steps[0] : 0;
  v.criteria[1] = v.monotonic;

  // Criterion 3: rank correlation with the ordinal level.
  try {
    v.spearman_rho = stats::spearman_rho(all_values, all_levels);
  } catch (const StatisticError&) {
    v.spearman_rho = 0.0;
  }
  v.criteria[2] = std::fabs(v.spearman_rho) >= config.min_abs_rho;

  // Criterion 4: within-level text type variation and whether it blurs a
  // distinguished adjacent pair.
  for (Level l : kLevels) {
    TextTypeTest t;
    t.level = l;
    stats::GroupedSample types;
    for (const auto& [type, g] : by_type[ordinal(l)]) {
      if (g.size() < 2) continue;
      t.groups.emplace_back(type, summarize(g));
      types.groups.emplace_back(std::string(to_string(type)), g);
    }
    if (types.groups.size() < 2) continue;
    t.p_value = types.groups.size() == 2 ? stats::welch_t_test(types.groups[0].second, types.groups[1].second).p_value
                                         : welch_p(types);
    t.significant = t.p_value <= alpha;
    v.text_type_variation[ordinal(l)] = t.significant;
    v.text_type_tests.push_back(std::move(t));
  }
  std::size_t interfered = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    if (!v.adjacent_significant[a]) continue;
    for (std::size_t side = 0; side < 2 && !v.interfered_pairs[a]; ++side) {
      const std::size_t own = a + side;
      const std::size_t other = a + 1 - side;
      if (!v.text_type_variation[own]) continue;
      const int dir = sign(v.levels[other].mean - v.levels[own].mean);
      for (const auto& [type, g] : by_type[own]) {
        if (g.size() < 2) continue;
        const bool reversed = sign(v.levels[other].mean - stats::mean(g)) != dir;
        const bool blurred = stats::welch_t_test(g, by_level[other]).p_value > config.posthoc_alpha;
        if (reversed || blurred) {
          v.interfered_pairs[a] = true;
          break;
        }
      }
    }
    if (v.interfered_pairs[a]) ++interfered;
  }
  const bool any_variation =
      std::any_of(v.text_type_variation.begin(), v.text_type_variation.end(), [](bool b) { return b; });
  v.criteria[3] = interfered == 0;

  if (v.criteria[0] && v.criteria[1] && v.criteria[2] && v.criteria[3]) {
    v.relevant = true;
    v.rationale = any_variation ? "main rule (text type variation does not interfere)" : "main rule";
    return v;
  }

  // Exception A: a reversal is tolerated when no level varies by text type
  // and every level reached after a change of direction differs from all
  // other levels.
  if (!v.monotonic && !any_variation && v.criteria[0] && v.criteria[2]) {
    bool all_distinct = true;
    bool any_turn = false;
    for (std::size_t a = 1; a < 3; ++a) {
      if (steps[a] == steps[a - 1] && steps[a] != 0) continue;
      any_turn = true;
      const std::size_t level = a + 1;
      for (std::size_t m = 0; m < kLevelCount; ++m) {
        if (m != level && v.pairwise_p[level][m] > config.posthoc_alpha) all_distinct = false;
      }
    }
    if (steps[0] == 0) all_distinct = false;
    if (any_turn && all_distinct) {
      v.relevant = true;
      v.rationale = "exception A (non-monotonic, no text type variation, turning level distinct from all others)";
      return v;
    }
  }

  // Exception B: every adjacent pair distinguished in one direction and
  // text type variation blurs at most one of them.
  const bool all_adjacent =
      v.adjacent_significant[0] && v.adjacent_significant[1] && v.adjacent_significant[2];
  if (all_adjacent && v.anova_significant && v.monotonic && v.criteria[2] && interfered <= 1) {
    v.relevant = true;
    v.rationale = "exception B (all adjacent pairs distinguished, variation interferes with one pair)";
    return v;
  }

  static constexpr std::array<const char*, 4> kNames = {"adjacent difference", "monotonicity", "correlation",
                                                         "text type variation"};
  std::string failed;
  for (std::size_t c = 0; c < 4; ++c) {
    if (!v.criteria[c]) failed += (failed.empty() ? "" : ", ") + std::string(kNames[c]);
  }
  v.rationale = "not relevant: fails " + failed;
  return v;
}

RelevanceReport audit_relevance(const FeatureMatrix& matrix, const AuditConfig& config) {
  RelevanceReport report;
  report.config = config;
  report.threshold = config.threshold();

  std::vector<const FeatureRow*> rows;
  for (const FeatureRow& r : matrix.rows) {
    if (!config.split || r.meta.split == *config.split) rows.push_back(&r);
  }
  for (Level l : kLevels) {
    const bool present = std::any_of(rows.begin(), rows.end(), [l](const FeatureRow* r) { return r->meta.level == l; });
    if (!present) throw DataError("level " + std::string(to_string(l)) + " is absent from the audited rows");
  }

  report.verdicts.resize(matrix.cols());
  parallel_for(matrix.cols(), config.threads, [&](std::size_t j) {
    std::vector<double> values;
    std::vector<DocMeta> meta;
    std::size_t excluded = 0;
    for (const FeatureRow* r : rows) {
      if (r->is_degenerate(j)) {
        ++excluded;
        continue;
      }
      values.push_back(r->values[j]);
      meta.push_back(r->meta);
    }
    report.verdicts[j] = audit_feature(matrix.feature_ids[j], values, meta, config);
    report.verdicts[j].excluded_degenerate = excluded;
  });
  return report;
}

}  // namespace cefr
