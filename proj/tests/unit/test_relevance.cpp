#include <doctest.h>

#include <cmath>

#include "cefr/random.hpp"
#include "cefr/relevance.hpp"
#include "cefr/synth.hpp"

using namespace cefr;

namespace {

struct Column {
  std::vector<double> values;
  std::vector<DocMeta> meta;
};

// 40 rows per level split over two text types; value = level_mean + type_shift + noise.
Column make_column(const std::array<double, 4>& level_means, double type_shift, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Column c;
  for (Level l : kLevels) {
    for (int i = 0; i < 40; ++i) {
      const TextType t = i % 2 == 0 ? TextType::kNarrative : TextType::kArgumentative;
      const double shift = t == TextType::kNarrative ? 0.0 : type_shift;
      c.values.push_back(level_means[ordinal(l)] + shift + rng.normal(0.0, sd));
      c.meta.push_back({l, t, Split::kTrain});
    }
  }
  return c;
}

RelevanceVerdict audit(const Column& c) { return audit_feature("f", c.values, c.meta, AuditConfig{}); }

}  // namespace

TEST_SUITE("relevance") {
  TEST_CASE("Bonferroni threshold in literal and exact mode") {
    AuditConfig c;
    CHECK(c.threshold() == 0.0003);
    c.literal_threshold = false;
    CHECK(c.threshold() == doctest::Approx(0.05 / 148).epsilon(1e-15));
    CHECK(std::fabs(c.threshold() - 3.378e-4) < 5e-8);
    c.literal_threshold = true;
    c.alpha0 = 0.01;
    c.bonferroni_denominator = 20;
    CHECK(c.threshold() == doctest::Approx(0.0005));
    CHECK(AuditConfig::from_json(c.to_json()).threshold() == c.threshold());
  }

  TEST_CASE("clean increasing feature passes the main rule") {
    const auto v = audit(make_column({1, 2, 3, 4}, 0.0, 0.3, 1));
    CHECK(v.relevant);
    CHECK(v.direction == 1);
    CHECK(v.spearman_rho > 0.8);
    CHECK(v.rationale.find("main rule") != std::string::npos);
  }

  TEST_CASE("decreasing feature is relevant with negative direction") {
    const auto v = audit(make_column({4, 3, 2, 1}, 0.0, 0.3, 2));
    CHECK(v.relevant);
    CHECK(v.direction == -1);
    CHECK(v.spearman_rho < -0.8);
  }

  TEST_CASE("genre-only feature is rejected") {
    const auto v = audit(make_column({0, 0, 0, 0}, 3.0, 0.3, 3));
    CHECK_FALSE(v.relevant);
    CHECK_FALSE(v.criteria[0]);
  }

  TEST_CASE("reversal with distinct turning level uses exception A") {
    // rises to B2 and falls back at C1 to a value distinct from every other level
    const auto v = audit(make_column({1, 2, 4, 3}, 0.0, 0.2, 4));
    CHECK_FALSE(v.monotonic);
    CHECK(v.relevant);
    CHECK(v.rationale.find("exception A") != std::string::npos);
  }

  TEST_CASE("reversal back onto an earlier level is rejected") {
    const auto v = audit(make_column({1, 3, 4, 3}, 0.0, 0.2, 5));
    CHECK_FALSE(v.relevant);
  }

  TEST_CASE("flat feature is not relevant") {
    const auto v = audit(make_column({2, 2, 2, 2}, 0.0, 0.5, 6));
    CHECK_FALSE(v.relevant);
  }

  TEST_CASE("a level with too few rows yields a not-relevant verdict") {
    Column c = make_column({1, 2, 3, 4}, 0.0, 0.3, 7);
    std::vector<double> values;
    std::vector<DocMeta> meta;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      if (c.meta[i].level == Level::kA2 && !values.empty() && meta.back().level == Level::kA2) continue;
      values.push_back(c.values[i]);
      meta.push_back(c.meta[i]);
    }
    const auto v = audit_feature("f", values, meta, AuditConfig{});
    CHECK_FALSE(v.relevant);
    CHECK(v.rationale.find("usable rows") != std::string::npos);
  }

  TEST_CASE("planted synthetic matrix verdicts") {
    const auto sm = synth::make_matrix();
    const auto report = audit_relevance(sm.matrix);
    std::map<std::string, const RelevanceVerdict*> by_id;
    for (const auto& v : report.verdicts) by_id[v.feature_id] = &v;
    std::size_t monotone_hits = 0;
    const auto monotone = sm.ids_of(synth::Planted::kMonotone);
    for (const auto& id : monotone) monotone_hits += by_id.at(id)->relevant ? 1 : 0;
    CHECK(static_cast<double>(monotone_hits) >= 0.95 * static_cast<double>(monotone.size()));
    for (const auto& id : sm.ids_of(synth::Planted::kGenreOnly)) CHECK_FALSE(by_id.at(id)->relevant);
    for (const auto& id : sm.ids_of(synth::Planted::kExceptionA)) {
      CHECK(by_id.at(id)->rationale.find("exception A") != std::string::npos);
    }
    for (const auto& id : sm.ids_of(synth::Planted::kExceptionB)) {
      CHECK(by_id.at(id)->rationale.find("exception B") != std::string::npos);
    }
    for (const auto& id : sm.ids_of(synth::Planted::kNoise)) CHECK_FALSE(by_id.at(id)->relevant);
  }

  TEST_CASE("degenerate rows are excluded and the report serialises") {
    const auto sm = synth::make_matrix();
    const auto report = audit_relevance(sm.matrix);
    std::size_t excluded = 0;
    for (const auto& v : report.verdicts) excluded += v.excluded_degenerate;
    CHECK(excluded > 0);
    const auto j = report.to_json();
    CHECK(j.contains("threshold"));
    CHECK(j.at("relevant").size() == report.relevant_ids().size());
    CHECK(j.at("verdicts").size() == sm.matrix.cols());
    CHECK_FALSE(report.render_table().empty());
  }

  TEST_CASE("audit is deterministic across thread counts") {
    const auto sm = synth::make_matrix();
    AuditConfig one;
    one.threads = 1;
    AuditConfig many;
    many.threads = 4;
    CHECK(audit_relevance(sm.matrix, one).to_json() == audit_relevance(sm.matrix, many).to_json());
  }
}
