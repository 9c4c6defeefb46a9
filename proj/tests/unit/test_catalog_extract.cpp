#include <doctest.h>

#include <filesystem>

#include "cefr/catalog.hpp"
#include "cefr/error.hpp"
#include "cefr/error_annotation.hpp"
#include "cefr/extract.hpp"
#include "cefr/matrix.hpp"
#include "cefr/synth.hpp"
#include "support.hpp"

using namespace cefr;
using namespace cefr::testing;
namespace fs = std::filesystem;

namespace {

Corpus two_documents() {
  Corpus c;
  c.documents.push_back(make_document(
      "doc-1",
      {{{"Ma", "mina", "PRON"}, {"elan", "elama", "VERB"}, {"väikeses", "väike", "ADJ"}, {"linnas", "linn", "NOUN"},
        {".", ".", "PUNCT"}},
       {{"Linn", "linn", "NOUN"}, {"on", "olema", "AUX"}, {"ilus", "ilus", "ADJ"}}},
      {Level::kA2, TextType::kPersonalLetter, Split::kTrain}));
  c.documents.push_back(make_document(
      "doc-2",
      {{{"Ühiskondlik", "ühiskondlik", "ADJ"}, {"arutelu", "arutelu", "NOUN"}, {"nõuab", "nõudma", "VERB"},
        {"põhjendatud", "põhjendatud", "ADJ"}, {"seisukohti", "seisukoht", "NOUN"}, {".", ".", "PUNCT"}}},
      {Level::kC1, TextType::kArgumentative, Split::kTest1}));
  return c;
}

EditAnnotationSet two_edits() {
  return {{"doc-1", {{Tool::kSpeller, 0, 2, 3, {"väikses"}}}}, {"doc-2", {}}};
}

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("standard catalog layout") {
    const auto c = FeatureCatalog::standard();
    CHECK(c.ids(Category::kLexical).size() == 20);
    CHECK(c.ids(Category::kSurface).size() == 9);
    CHECK(c.ids(Category::kError).size() == 9);
    CHECK(c.size() == 158);
    CHECK(c.index_of("lemma_count") == 0u);
    CHECK(c.at("adv_ttr").direction_hint == Direction::kDecreasing);
  }

  TEST_CASE("json round trip keeps the hash; renaming changes it") {
    const auto c = FeatureCatalog::standard();
    const auto back = FeatureCatalog::from_json(c.to_json());
    CHECK(back.hash() == c.hash());
    CHECK(back.ids() == c.ids());
    auto defs = c.defs();
    defs[3].id = "uber_renamed";
    CHECK(FeatureCatalog(defs).hash() != c.hash());
  }

  TEST_CASE("bundled catalog file equals the built-in catalog") {
    const auto file = FeatureCatalog::load(fs::path(CEFR_REPO_DATA) / "catalog.json");
    CHECK(file.hash() == FeatureCatalog::standard().hash());
  }

  TEST_CASE("duplicate ids are rejected") {
    CHECK_THROWS_AS(FeatureCatalog({{"x", Category::kLexical, "", std::nullopt}, {"x", Category::kSurface, "", std::nullopt}}),
                    DataError);
  }
}

TEST_SUITE("extract") {
  TEST_CASE("two-document fixture gives a two-row matrix in catalog order") {
    const auto catalog = FeatureCatalog::standard();
    const auto res = synth::make_resources();
    const auto edits = two_edits();
    const FeatureMatrix m = extract_features(two_documents(), catalog, res, &edits);
    REQUIRE(m.rows.size() == 2);
    CHECK(m.cols() == catalog.size());
    CHECK(m.feature_ids == catalog.ids());
    CHECK(m.catalog_hash == catalog.hash());
    CHECK(m.rows[1].meta.level == Level::kC1);
    CHECK(m.rows[0].values[*m.column("word_count")] == 7.0);
  }

  TEST_CASE("full extraction equals the per-category operations") {
    const auto catalog = FeatureCatalog::standard();
    const auto res = synth::make_resources();
    const Corpus corpus = two_documents();
    const auto edits = two_edits();
    for (const Document& d : corpus.documents) {
      const FeatureMap full = extract_document(d, catalog, res, &edits.at(d.doc_id));
      FeatureMap parts = compute_diversity(d);
      parts.merge(compute_sophistication_density(d, res));
      parts.merge(compute_morphological_all(d));
      parts.merge(compute_surface(d));
      parts.merge(compute_error_features(d, edits.at(d.doc_id)));
      for (const auto& [id, v] : full) {
        INFO(id);
        CHECK(v.value == parts.at(id).value);
        CHECK(v.degenerate == parts.at(id).degenerate);
      }
    }
  }

  TEST_CASE("error features without edits are refused; a catalog without them is not") {
    const auto res = synth::make_resources();
    CHECK_THROWS_AS(extract_features(two_documents(), FeatureCatalog::standard(), res, nullptr), DataError);
    std::vector<FeatureDef> no_errors;
    const auto standard = FeatureCatalog::standard();
    for (const auto& d : standard.defs()) {
      if (d.category != Category::kError) no_errors.push_back(d);
    }
    const auto m = extract_features(two_documents(), FeatureCatalog(no_errors), res, nullptr);
    CHECK(m.cols() == 149);
  }

  TEST_CASE("matrix JSON round trip, split filter and column selection") {
    const auto res = synth::make_resources();
    const auto edits = two_edits();
    const FeatureMatrix m = extract_features(two_documents(), FeatureCatalog::standard(), res, &edits);
    const FeatureMatrix back = FeatureMatrix::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    CHECK(m.filter_split(Split::kTrain).rows.size() == 1);
    const auto sub = m.select_columns({"ttr", "lemma_count"});
    CHECK(sub.feature_ids == std::vector<std::string>{"ttr", "lemma_count"});
    CHECK(sub.rows[0].values[1] == m.rows[0].values[0]);
    CHECK_THROWS_AS(m.require_column("nope"), DataError);

    const fs::path p = fs::temp_directory_path() / "cefr_matrix_test.json";
    m.save(p);
    CHECK(FeatureMatrix::load(p).to_json() == m.to_json());
    fs::remove(p);
  }

  TEST_CASE("extraction does not mutate its inputs and is repeatable") {
    const auto res = synth::make_resources();
    const auto edits = two_edits();
    const Corpus corpus = two_documents();
    const Corpus copy = corpus;
    const auto a = extract_features(corpus, FeatureCatalog::standard(), res, &edits);
    const auto b = extract_features(corpus, FeatureCatalog::standard(), res, &edits);
    CHECK(a.to_json() == b.to_json());
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
      CHECK(corpus.documents[i].sentences == copy.documents[i].sentences);
    }
  }
}
