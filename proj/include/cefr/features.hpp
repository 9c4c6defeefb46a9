#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cefr/catalog.hpp"
#include "cefr/corpus.hpp"
#include "cefr/resources.hpp"

namespace cefr {

/// A single feature value. Degenerate values (undefined for the document,
/// e.g. a class-conditional share with no tokens of that class) carry the
/// sentinel 0.0 and the flag set.
struct FeatureValue {
  double value = 0.0;
  bool degenerate = false;

  static FeatureValue ok(double v) { return {v, false}; }
  static FeatureValue undefined() { return {0.0, true}; }
};

using FeatureMap = std::map<std::string, FeatureValue>;

/// Catalog entries produced by each extractor, in catalog order.
std::vector<FeatureDef> lexical_feature_defs();
std::vector<FeatureDef> morphological_feature_defs();
std::vector<FeatureDef> surface_feature_defs();

// ---- lexical ---------------------------------------------------------------

/// Lemma sequence of the word tokens (lemma falls back to the lowercased form).
std::vector<std::string> word_lemmas(const Document& doc);

/// One MTLD pass: number of completed factors plus the partial remainder.
double mtld_factor_count(std::span<const std::string> lemmas, double threshold = 0.72);
/// Mean of the forward and backward MTLD scores; nullopt when no factor completes.
std::optional<double> mtld(std::span<const std::string> lemmas, double threshold = 0.72);

/// lemma_count, ttr, rttr, uber, maas, mtld, cvv and the six PoS TTRs.
FeatureMap compute_diversity(const Document& doc);
/// rare_1000 .. rare_5000, noun_abstractness, lexical_density.
FeatureMap compute_sophistication_density(const Document& doc, const LexicalResources& res);

// ---- morphological ----------------------------------------------------------

/// Every morphological feature known to the extractor, keyed by catalog id.
FeatureMap compute_morphological_all(const Document& doc);
/// Restricted to the morphological ids of the catalog; unknown ids throw DataError.
FeatureMap compute_morphological(const Document& doc, const FeatureCatalog& catalog);

// ---- surface ----------------------------------------------------------------

FeatureMap compute_surface(const Document& doc, const Syllabifier& syllabifier = Syllabifier::estonian());

/// SMOG grade from polysyllable and sentence counts.
double smog_grade(double polysyllables, double sentences);
double lix_index(double words, double sentences, double long_words);
double flesch_kincaid_grade(double words, double sentences, double syllables);

}  // namespace cefr
