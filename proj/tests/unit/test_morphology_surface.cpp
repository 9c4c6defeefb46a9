#include <doctest.h>

#include <cmath>

#include "cefr/catalog.hpp"
#include "cefr/corpus.hpp"
#include "cefr/error.hpp"
#include "cefr/features.hpp"
#include "support.hpp"

using namespace cefr;
using namespace cefr::testing;

namespace {

// 10 words + 1 punctuation mark over two sentences.
const char* kFixture =
    "1\tMa\tmina\tPRON\t_\tCase=Nom|Number=Sing|Person=1|PronType=Prs\t2\tnsubj\t_\t_\n"
    "2\tei\tei\tAUX\t_\tPolarity=Neg\t3\taux\t_\t_\n"
    "3\ttea\tteadma\tVERB\t_\tConnegative=Yes|Mood=Ind|Tense=Pres|VerbForm=Fin|Voice=Act\t0\troot\t_\t_\n"
    "4\tsuurt\tsuur\tADJ\t_\tCase=Par|Degree=Pos|Number=Sing\t5\tamod\t_\t_\n"
    "5\tmaja\tmaja\tNOUN\t_\tCase=Par|Number=Sing\t3\tobj\t_\t_\n"
    "6\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_\n"
    "\n"
    "1\tLinna\tlinn\tNOUN\t_\tCase=Gen|Number=Sing\t2\tnmod\t_\t_\n"
    "2\tkaudu\tkaudu\tADP\t_\tAdpType=Post\t3\tcase\t_\t_\n"
    "3\tminna\tminema\tVERB\t_\tVerbForm=Inf\t0\troot\t_\t_\n"
    "4\tja\tja\tCCONJ\t_\t_\t5\tcc\t_\t_\n"
    "5\tsuuremaid\tsuur\tADJ\t_\tCase=Par|Degree=Cmp|Number=Plur\t3\tconj\t_\t_\n"
    "\n";

Document fixture_doc() {
  Document d;
  d.doc_id = "m";
  d.sentences = parse_conllu_string(kFixture);
  return d;
}

}  // namespace

TEST_SUITE("morphology") {
  TEST_CASE("shares over word tokens and PoS subsets") {
    const FeatureMap m = compute_morphological_all(fixture_doc());
    CHECK(m.at("pos_noun_pct").value == doctest::Approx(20.0));
    CHECK(m.at("pos_verb_pct").value == doctest::Approx(20.0));
    CHECK(m.at("pos_cconj_pct").value == doctest::Approx(10.0));
    CHECK(m.at("conj_pct").value == doctest::Approx(10.0));
    CHECK(m.at("cconj_share").value == doctest::Approx(100.0));
    CHECK(m.at("postposition_share").value == doctest::Approx(100.0));
    CHECK(m.at("preposition_share").value == doctest::Approx(0.0));
    // nominals: Ma(Nom) suurt(Par) maja(Par) Linna(Gen) suuremaid(Par)
    CHECK(m.at("nominal_case_count").value == 3.0);
    CHECK(m.at("nominal_case_par_pct").value == doctest::Approx(60.0));
    CHECK(m.at("nominal_plur_pct").value == doctest::Approx(20.0));
    CHECK(m.at("adj_degree_cmp_pct").value == doctest::Approx(50.0));
    CHECK(m.at("pron_type_personal_pct").value == doctest::Approx(100.0));
    // verbs: ei(AUX) tea minna
    CHECK(m.at("verb_negative_pct").value == doctest::Approx(200.0 / 3.0));
    CHECK(m.at("verb_form_inf_pct").value == doctest::Approx(100.0 / 3.0));
    CHECK(m.at("verb_finite_pct").value == doctest::Approx(100.0 / 3.0));
    CHECK(m.at("verb_nonfinite_pct").value == doctest::Approx(100.0 / 3.0));
  }

  TEST_CASE("empty PoS subset yields the degenerate flag, not zero") {
    const FeatureMap m = compute_morphological_all(fixture_doc());
    CHECK(m.at("pos_intj_pct").degenerate == false);
    CHECK(m.at("pos_intj_pct").value == 0.0);
    Document d = make_document("x", {{{"tere", "tere", "INTJ"}}});
    const FeatureMap e = compute_morphological_all(d);
    CHECK(e.at("noun_case_nom_pct").degenerate);
    CHECK(e.at("verb_mood_ind_pct").degenerate);
    CHECK(e.at("noun_case_count").value == 0.0);
  }

  TEST_CASE("catalog restriction and unknown ids") {
    const auto catalog = FeatureCatalog::standard();
    const FeatureMap m = compute_morphological(fixture_doc(), catalog);
    CHECK(m.size() == catalog.ids(Category::kMorphological).size());
    FeatureCatalog bogus({{"morph_unknown", Category::kMorphological, "?", std::nullopt}});
    CHECK_THROWS_AS(compute_morphological(fixture_doc(), bogus), DataError);
  }

  TEST_CASE("core relevant morphological ids are always catalogued") {
    const auto catalog = FeatureCatalog::standard();
    for (const auto& id : core_morphological_ids()) CHECK(catalog.contains(id));
  }
}

TEST_SUITE("surface") {
  TEST_CASE("readability formulas") {
    CHECK(smog_grade(30, 30) == doctest::Approx(1.0430 * std::sqrt(30.0) + 3.1291));
    CHECK(lix_index(100, 5, 25) == doctest::Approx(45.0));
    CHECK(flesch_kincaid_grade(100, 5, 150) == doctest::Approx(0.39 * 20 + 11.8 * 1.5 - 15.59));
  }

  TEST_CASE("surface counts on a recounted document") {
    const Document doc = make_document(
        "s", {{{"Õpetaja", "õpetaja", "NOUN"}, {"kirjutab", "kirjutama", "VERB"}, {"tahvlile", "tahvel", "NOUN"},
               {".", ".", "PUNCT"}},
              {{"Ma", "mina", "PRON"}, {"loen", "lugema", "VERB"}}});
    const FeatureMap m = compute_surface(doc);
    // syllables: õ-pe-ta-ja 4, kir-ju-tab 3, tahv-li-le 3, ma 1, loen 1
    CHECK(m.at("word_count").value == 5.0);
    CHECK(m.at("sentence_count").value == 2.0);
    CHECK(m.at("syllable_count").value == 12.0);
    CHECK(m.at("avg_word_len").value == doctest::Approx((7.0 + 8 + 8 + 2 + 4) / 5));
    CHECK(m.at("avg_sent_len").value == doctest::Approx(2.5));
    CHECK(m.at("polysyllabic_pct").value == doctest::Approx(60.0));
    CHECK(m.at("lix").value == doctest::Approx(lix_index(5, 2, 3)));
    CHECK(m.at("smog").value == doctest::Approx(smog_grade(3, 2)));
    CHECK(m.at("fk_grade").value == doctest::Approx(flesch_kincaid_grade(5, 2, 12)));
  }
}
