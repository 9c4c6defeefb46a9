#include <cmath>

#include "cefr/error.hpp"
#include "cefr/features.hpp"
#include "cefr/text.hpp"

namespace cefr {

std::vector<FeatureDef> surface_feature_defs() {
  using enum Direction;
  return {
      {"word_count", Category::kSurface, "number of words", kIncreasing},
      {"sentence_count", Category::kSurface, "number of sentences", kIncreasing},
      {"syllable_count", Category::kSurface, "number of syllables", kIncreasing},
      {"avg_word_len", Category::kSurface, "average word length in characters", kIncreasing},
      {"avg_sent_len", Category::kSurface, "average sentence length in words", kIncreasing},
      {"polysyllabic_pct", Category::kSurface, "% of words with three or more syllables", kIncreasing},
      {"lix", Category::kSurface, "LIX readability index", kIncreasing},
      {"smog", Category::kSurface, "SMOG grade", kIncreasing},
      {"fk_grade", Category::kSurface, "Flesch-Kincaid grade level", kIncreasing},
  };
}

double smog_grade(double polysyllables, double sentences) {
  return 1.0430 * std::sqrt(polysyllables * 30.0 / sentences) + 3.1291;
}

double lix_index(double words, double sentences, double long_words) {
  return words / sentences + 100.0 * long_words / words;
}

double flesch_kincaid_grade(double words, double sentences, double syllables) {
  return 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59;
}

FeatureMap compute_surface(const Document& doc, const Syllabifier& syllabifier) {
  std::size_t words = 0;
  std::size_t syllables = 0;
  std::size_t chars = 0;
  std::size_t polysyllabic = 0;
  std::size_t long_words = 0;
  for (const Sentence& s : doc.sentences) {
    for (const Token& t : s.tokens) {
      if (!t.is_word()) continue;
      ++words;
      const std::size_t syl = syllabifier.count(t.form);
      syllables += syl;
      if (syl >= 3) ++polysyllabic;
      const std::size_t len = text::length(t.form);
      chars += len;
      if (len > 6) ++long_words;
    }
  }
  if (words == 0) throw DataError("document '" + doc.doc_id + "' has no word tokens");
  if (doc.sentences.empty()) throw DataError("document '" + doc.doc_id + "' has no sentences");

  const double w = static_cast<double>(words);
  const double s = static_cast<double>(doc.sentences.size());
  const double y = static_cast<double>(syllables);
  const double p = static_cast<double>(polysyllabic);
  return {
      {"word_count", FeatureValue::ok(w)},
      {"sentence_count", FeatureValue::ok(s)},
      {"syllable_count", FeatureValue::ok(y)},
      {"avg_word_len", FeatureValue::ok(static_cast<double>(chars) / w)},
      {"avg_sent_len", FeatureValue::ok(w / s)},
      {"polysyllabic_pct", FeatureValue::ok(100.0 * p / w)},
      {"lix", FeatureValue::ok(lix_index(w, s, static_cast<double>(long_words)))},
      {"smog", FeatureValue::ok(smog_grade(p, s))},
      {"fk_grade", FeatureValue::ok(flesch_kincaid_grade(w, s, y))},
  };
}

}  // namespace cefr
