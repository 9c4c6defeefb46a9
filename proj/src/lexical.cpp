#include <cmath>
#include <set>
#include <unordered_set>

#include "cefr/error.hpp"
#include "cefr/features.hpp"
#include "cefr/text.hpp"

namespace cefr {
namespace {

struct PosClass {
  const char* id;
  std::vector<std::string_view> upos;
  const char* description;
};

const std::vector<PosClass>& pos_ttr_classes() {
  static const std::vector<PosClass> classes = {
      {"noun_ttr", {"NOUN"}, "noun type-token ratio"},
      {"verb_ttr", {"VERB", "AUX"}, "verb type-token ratio"},
      {"adj_ttr", {"ADJ"}, "adjective type-token ratio"},
      {"adv_ttr", {"ADV"}, "adverb type-token ratio"},
      {"conj_ttr", {"CCONJ", "SCONJ"}, "conjunction type-token ratio"},
      {"pron_ttr", {"PRON"}, "pronoun type-token ratio"},
  };
  return classes;
}

bool in_class(const Token& t, const std::vector<std::string_view>& upos) {
  for (std::string_view u : upos) {
    if (t.upos == u) return true;
  }
  return false;
}

std::string lemma_of(const Token& t) { return t.lemma.empty() ? text::lower(t.form) : t.lemma; }

constexpr std::array<int, 5> kRareTiers = {1000, 2000, 3000, 4000, 5000};

}  // namespace

std::vector<FeatureDef> lexical_feature_defs() {
  using enum Direction;
  std::vector<FeatureDef> defs = {
      {"lemma_count", Category::kLexical, "number of distinct lemmas", kIncreasing},
      {"ttr", Category::kLexical, "type-token ratio over lemmas", std::nullopt},
      {"rttr", Category::kLexical, "root type-token ratio", kIncreasing},
      {"uber", Category::kLexical, "Uber index", std::nullopt},
      {"maas", Category::kLexical, "Maas index", std::nullopt},
      {"mtld", Category::kLexical, "measure of textual lexical diversity", kIncreasing},
      {"cvv", Category::kLexical, "corrected verb variation", kIncreasing},
  };
  for (const PosClass& c : pos_ttr_classes()) {
    defs.push_back({c.id, Category::kLexical, c.description,
                    std::string_view(c.id) == "adv_ttr" ? std::optional(kDecreasing) : std::nullopt});
  }
  for (int k : kRareTiers) {
    defs.push_back({"rare_" + std::to_string(k), Category::kLexical,
                    "% of words outside the " + std::to_string(k) + " most frequent lemmas",
                    k == 5000 ? std::optional(kIncreasing) : std::nullopt});
  }
  defs.push_back({"noun_abstractness", Category::kLexical, "mean abstractness rating of nouns (1-3)", kIncreasing});
  defs.push_back({"lexical_density", Category::kLexical, "% of content (non-function) words", std::nullopt});
  return defs;
}

std::vector<std::string> word_lemmas(const Document& doc) {
  std::vector<std::string> lemmas;
  for (const Sentence& s : doc.sentences) {
    for (const Token& t : s.tokens) {
      if (t.is_word()) lemmas.push_back(lemma_of(t));
    }
  }
  return lemmas;
}

double mtld_factor_count(std::span<const std::string> lemmas, double threshold) {
  double factors = 0.0;
  std::unordered_set<std::string_view> types;
  std::size_t tokens = 0;
  double ttr = 1.0;
  for (const std::string& lemma : lemmas) {
    ++tokens;
    types.insert(lemma);
    ttr = static_cast<double>(types.size()) / static_cast<double>(tokens);
    if (ttr <= threshold) {
      factors += 1.0;
      types.clear();
      tokens = 0;
      ttr = 1.0;
    }
  }
  if (tokens > 0) factors += (1.0 - ttr) / (1.0 - threshold);
  return factors;
}

std::optional<double> mtld(std::span<const std::string> lemmas, double threshold) {
  const double n = static_cast<double>(lemmas.size());
  const double forward = mtld_factor_count(lemmas, threshold);
  std::vector<std::string> reversed(lemmas.rbegin(), lemmas.rend());
  const double backward = mtld_factor_count(reversed, threshold);
  if (forward <= 0.0 || backward <= 0.0) return std::nullopt;
  return 0.5 * (n / forward + n / backward);
}

FeatureMap compute_diversity(const Document& doc) {
  const std::vector<std::string> lemmas = word_lemmas(doc);
  if (lemmas.empty()) throw DataError("document '" + doc.doc_id + "' has no word tokens");

  const double n = static_cast<double>(lemmas.size());
  const double t = static_cast<double>(std::set<std::string>(lemmas.begin(), lemmas.end()).size());
  FeatureMap out;
  out["lemma_count"] = FeatureValue::ok(t);
  out["ttr"] = FeatureValue::ok(t / n);
  out["rttr"] = FeatureValue::ok(t / std::sqrt(n));

  const double log_gap = std::log(n) - std::log(t);
  if (log_gap > 0.0) {
    const double ln_n = std::log(n);
    out["uber"] = FeatureValue::ok(ln_n * ln_n / log_gap);
    out["maas"] = FeatureValue::ok(log_gap / (ln_n * ln_n));
  } else {
    out["uber"] = FeatureValue::undefined();
    out["maas"] = FeatureValue::undefined();
  }

  const std::optional<double> m = mtld(lemmas);
  out["mtld"] = m ? FeatureValue::ok(*m) : FeatureValue::undefined();

  for (const PosClass& c : pos_ttr_classes()) {
    std::set<std::string> types;
    std::size_t tokens = 0;
    for (const Sentence& s : doc.sentences) {
      for (const Token& tok : s.tokens) {
        if (in_class(tok, c.upos)) {
          ++tokens;
          types.insert(lemma_of(tok));
        }
      }
    }
    out[c.id] = tokens == 0 ? FeatureValue::undefined()
                            : FeatureValue::ok(static_cast<double>(types.size()) / static_cast<double>(tokens));
    if (std::string_view(c.id) == "verb_ttr") {
      out["cvv"] = tokens == 0 ? FeatureValue::undefined()
                               : FeatureValue::ok(static_cast<double>(types.size()) /
                                                  std::sqrt(2.0 * static_cast<double>(tokens)));
    }
  }
  return out;
}

FeatureMap compute_sophistication_density(const Document& doc, const LexicalResources& res) {
  std::size_t words = 0;
  std::array<std::size_t, kRareTiers.size()> rare{};
  std::size_t content = 0;
  std::size_t rated_nouns = 0;
  double rating_sum = 0.0;
  for (const Sentence& s : doc.sentences) {
    for (const Token& t : s.tokens) {
      if (!t.is_word()) continue;
      ++words;
      const std::string lemma = lemma_of(t);
      const int r = res.rank(lemma);
      for (std::size_t i = 0; i < kRareTiers.size(); ++i) {
        if (r == 0 || r > kRareTiers[i]) ++rare[i];
      }
      if (!res.is_function_word(t.form, lemma)) ++content;
      if (t.upos == "NOUN") {
        if (const int a = res.abstractness_of(lemma); a > 0) {
          ++rated_nouns;
          rating_sum += a;
        }
      }
    }
  }
  if (words == 0) throw DataError("document '" + doc.doc_id + "' has no word tokens");

  FeatureMap out;
  const double w = static_cast<double>(words);
  for (std::size_t i = 0; i < kRareTiers.size(); ++i) {
    out["rare_" + std::to_string(kRareTiers[i])] = FeatureValue::ok(100.0 * static_cast<double>(rare[i]) / w);
  }
  out["noun_abstractness"] = rated_nouns == 0 ? FeatureValue::undefined()
                                              : FeatureValue::ok(rating_sum / static_cast<double>(rated_nouns));
  out["lexical_density"] = FeatureValue::ok(100.0 * static_cast<double>(content) / w);
  return out;
}

}  // namespace cefr
