#include <algorithm>
#include <set>

#include "cefr/error.hpp"
#include "cefr/features.hpp"
#include "cefr/text.hpp"

namespace cefr {
namespace {

struct Named {
  std::string_view tag;
  std::string_view key;
  std::string_view name;
};

// The 14 traditional Estonian cases plus the short (additive) illative.
constexpr std::array<Named, 15> kCases = {{{"Nom", "nom", "nominative"},
                                           {"Gen", "gen", "genitive"},
                                           {"Par", "par", "partitive"},
                                           {"Ill", "ill", "illative"},
                                           {"Ine", "ine", "inessive"},
                                           {"Ela", "ela", "elative"},
                                           {"All", "all", "allative"},
                                           {"Ade", "ade", "adessive"},
                                           {"Abl", "abl", "ablative"},
                                           {"Tra", "tra", "translative"},
                                           {"Ter", "ter", "terminative"},
                                           {"Ess", "ess", "essive"},
                                           {"Abe", "abe", "abessive"},
                                           {"Com", "com", "comitative"},
                                           {"Add", "add", "additive illative"}}};

constexpr std::array<std::string_view, 15> kWordUpos = {"ADJ",  "ADP",  "ADV",   "AUX",   "CCONJ",
                                                        "DET",  "INTJ", "NOUN",  "NUM",   "PART",
                                                        "PRON", "PROPN", "SCONJ", "VERB", "X"};

struct NominalBlock {
  std::string_view prefix;
  std::string_view label;
  std::vector<std::string_view> upos;
};

const std::array<NominalBlock, 4>& nominal_blocks() {
  static const std::array<NominalBlock, 4> blocks = {{{"nominal", "nominals", {"NOUN", "ADJ", "PRON", "NUM"}},
                                                      {"noun", "nouns", {"NOUN"}},
                                                      {"adj", "adjectives", {"ADJ"}},
                                                      {"pron", "pronouns", {"PRON"}}}};
  return blocks;
}

constexpr std::array<Named, 3> kDegrees = {{{"Pos", "pos", "positive"}, {"Cmp", "cmp", "comparative"}, {"Sup", "sup", "superlative"}}};
constexpr std::array<Named, 4> kMoods = {{{"Ind", "ind", "indicative"}, {"Imp", "imp", "imperative"},
                                          {"Cnd", "cnd", "conditional"}, {"Qot", "qot", "quotative"}}};
constexpr std::array<Named, 2> kTenses = {{{"Pres", "pres", "present"}, {"Past", "past", "past"}}};
constexpr std::array<Named, 3> kPersons = {{{"1", "1", "1st person"}, {"2", "2", "2nd person"}, {"3", "3", "3rd person"}}};
constexpr std::array<Named, 2> kNumbers = {{{"Sing", "sing", "singular"}, {"Plur", "plur", "plural"}}};
constexpr std::array<Named, 2> kVoices = {{{"Act", "act", "active"}, {"Pass", "pass", "passive"}}};
constexpr std::array<Named, 4> kNonFinite = {{{"Inf", "inf", "infinitive"}, {"Sup", "sup", "supine"},
                                              {"Conv", "conv", "gerund"}, {"Part", "part", "participle"}}};

constexpr std::array<Named, 5> kPronTypes = {{{"", "personal", "personal"},
                                              {"", "demonstrative", "demonstrative"},
                                              {"", "interrogative_relative", "interrogative-relative"},
                                              {"", "indefinite", "indefinite"},
                                              {"", "reflexive", "reflexive"}}};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool in_set(const Token& t, const std::vector<std::string_view>& upos) {
  return std::find(upos.begin(), upos.end(), t.upos) != upos.end();
}

bool has_value(std::string_view multi, std::string_view value) {
  std::size_t start = 0;
  while (start <= multi.size()) {
    const std::size_t comma = multi.find(',', start);
    const std::string_view part = multi.substr(start, comma == std::string_view::npos ? multi.npos : comma - start);
    if (part == value) return true;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return false;
}

bool pron_type_matches(const Token& t, std::string_view key) {
  const std::string_view type = t.feat("PronType");
  const bool reflexive = t.feat("Reflex") == "Yes";
  if (key == "reflexive") return reflexive;
  if (key == "personal") return has_value(type, "Prs") && !reflexive;
  if (key == "demonstrative") return has_value(type, "Dem");
  if (key == "interrogative_relative") return has_value(type, "Int") || has_value(type, "Rel");
  if (key == "indefinite") return has_value(type, "Ind");
  return false;
}

bool is_negative_component(const Token& t) {
  return t.feat("Polarity") == "Neg" || t.feat("Connegative") == "Yes" || t.lemma == "ei";
}

bool is_non_finite(const Token& t) {
  const std::string_view form = t.feat("VerbForm");
  return std::any_of(kNonFinite.begin(), kNonFinite.end(), [&](const Named& n) { return n.tag == form; });
}

std::vector<const Token*> collect(const Document& doc, const std::vector<std::string_view>& upos) {
  std::vector<const Token*> out;
  for (const Sentence& s : doc.sentences) {
    for (const Token& t : s.tokens) {
      if (in_set(t, upos)) out.push_back(&t);
    }
  }
  return out;
}

template <typename Pred>
FeatureValue share(const std::vector<const Token*>& tokens, Pred pred) {
  if (tokens.empty()) return FeatureValue::undefined();
  const auto hits = std::count_if(tokens.begin(), tokens.end(), [&](const Token* t) { return pred(*t); });
  return FeatureValue::ok(100.0 * static_cast<double>(hits) / static_cast<double>(tokens.size()));
}

FeatureDef def(std::string id, std::string description) {
  return {std::move(id), Category::kMorphological, std::move(description), std::nullopt};
}

}  // namespace

std::vector<FeatureDef> morphological_feature_defs() {
  std::vector<FeatureDef> defs;
  for (std::string_view u : kWordUpos) {
    defs.push_back(def("pos_" + lower_ascii(u) + "_pct", "% of words tagged " + std::string(u)));
  }
  defs.push_back(def("conj_pct", "% of words that are conjunctions (coordinating + subordinating)"));
  defs.push_back(def("cconj_share", "coordinating conjunctions among conjunctions (%)"));
  defs.push_back(def("sconj_share", "subordinating conjunctions among conjunctions (%)"));
  defs.push_back(def("postposition_share", "postpositions among adpositions (%)"));
  defs.push_back(def("preposition_share", "prepositions among adpositions (%)"));

  for (const NominalBlock& b : nominal_blocks()) {
    const std::string p(b.prefix);
    defs.push_back(def(p + "_case_count", "number of distinct cases in " + std::string(b.label)));
    for (const Named& c : kCases) {
      defs.push_back(def(p + "_case_" + std::string(c.key) + "_pct",
                         std::string(c.name) + " forms among " + std::string(b.label) + " (%)"));
    }
    for (const Named& n : kNumbers) {
      defs.push_back(def(p + "_" + std::string(n.key) + "_pct",
                         std::string(n.name) + " forms among " + std::string(b.label) + " (%)"));
    }
    if (b.prefix == "adj") {
      for (const Named& d : kDegrees) {
        defs.push_back(def("adj_degree_" + std::string(d.key) + "_pct", std::string(d.name) + " degree among adjectives (%)"));
      }
    }
    if (b.prefix == "pron") {
      for (const Named& t : kPronTypes) {
        defs.push_back(def("pron_type_" + std::string(t.key) + "_pct", std::string(t.name) + " pronouns (%)"));
      }
    }
  }

  defs.push_back(def("verb_finite_pct", "finite forms among verbs (%)"));
  defs.push_back(def("verb_nonfinite_pct", "non-finite forms among verbs (%)"));
  for (const Named& m : kMoods) defs.push_back(def("verb_mood_" + std::string(m.key) + "_pct", std::string(m.name) + " mood among verbs (%)"));
  for (const Named& t : kTenses) defs.push_back(def("verb_tense_" + std::string(t.key) + "_pct", std::string(t.name) + " tense among verbs (%)"));
  for (const Named& p : kPersons) defs.push_back(def("verb_person_" + std::string(p.key) + "_pct", std::string(p.name) + " forms among verbs (%)"));
  for (const Named& n : kNumbers) defs.push_back(def("verb_number_" + std::string(n.key) + "_pct", std::string(n.name) + " forms among verbs (%)"));
  for (const Named& v : kVoices) defs.push_back(def("verb_voice_" + std::string(v.key) + "_pct", std::string(v.name) + " voice among verbs (%)"));
  defs.push_back(def("verb_negative_pct", "components of negative forms among verbs (%)"));
  for (const Named& f : kNonFinite) defs.push_back(def("verb_form_" + std::string(f.key) + "_pct", std::string(f.name) + " forms among verbs (%)"));
  return defs;
}

FeatureMap compute_morphological_all(const Document& doc) {
  const std::vector<const Token*> words = [&] {
    std::vector<const Token*> w;
    for (const Sentence& s : doc.sentences) {
      for (const Token& t : s.tokens) {
        if (t.is_word()) w.push_back(&t);
      }
    }
    return w;
  }();
  if (words.empty()) throw DataError("document '" + doc.doc_id + "' has no word tokens");

  FeatureMap out;
  for (std::string_view u : kWordUpos) {
    out["pos_" + lower_ascii(u) + "_pct"] = share(words, [&](const Token& t) { return t.upos == u; });
  }
  out["conj_pct"] = share(words, [](const Token& t) { return t.upos == "CCONJ" || t.upos == "SCONJ"; });
  const auto conj = collect(doc, {"CCONJ", "SCONJ"});
  out["cconj_share"] = share(conj, [](const Token& t) { return t.upos == "CCONJ"; });
  out["sconj_share"] = share(conj, [](const Token& t) { return t.upos == "SCONJ"; });
  const auto adp = collect(doc, {"ADP"});
  out["postposition_share"] = share(adp, [](const Token& t) { return t.feat("AdpType") == "Post"; });
  out["preposition_share"] = share(adp, [](const Token& t) { return t.feat("AdpType") == "Prep"; });

  for (const NominalBlock& b : nominal_blocks()) {
    const std::string p(b.prefix);
    const auto tokens = collect(doc, b.upos);
    std::set<std::string_view> cases;
    for (const Token* t : tokens) {
      if (const std::string_view c = t->feat("Case"); !c.empty()) cases.insert(c);
    }
    out[p + "_case_count"] = FeatureValue::ok(static_cast<double>(cases.size()));
    for (const Named& c : kCases) {
      out[p + "_case_" + std::string(c.key) + "_pct"] = share(tokens, [&](const Token& t) { return t.feat("Case") == c.tag; });
    }
    for (const Named& n : kNumbers) {
      out[p + "_" + std::string(n.key) + "_pct"] = share(tokens, [&](const Token& t) { return t.feat("Number") == n.tag; });
    }
    if (b.prefix == "adj") {
      for (const Named& d : kDegrees) {
        out["adj_degree_" + std::string(d.key) + "_pct"] = share(tokens, [&](const Token& t) { return t.feat("Degree") == d.tag; });
      }
    }
    if (b.prefix == "pron") {
      for (const Named& pt : kPronTypes) {
        out["pron_type_" + std::string(pt.key) + "_pct"] = share(tokens, [&](const Token& t) { return pron_type_matches(t, pt.key); });
      }
    }
  }

  const auto verbs = collect(doc, {"VERB", "AUX"});
  out["verb_finite_pct"] = share(verbs, [](const Token& t) { return t.feat("VerbForm") == "Fin"; });
  out["verb_nonfinite_pct"] = share(verbs, is_non_finite);
  auto verb_block = [&](std::string_view group, std::string_view attr, std::span<const Named> values) {
    for (const Named& v : values) {
      out["verb_" + std::string(group) + "_" + std::string(v.key) + "_pct"] =
          share(verbs, [&](const Token& t) { return t.feat(attr) == v.tag; });
    }
  };
  verb_block("mood", "Mood", kMoods);
  verb_block("tense", "Tense", kTenses);
  verb_block("person", "Person", kPersons);
  verb_block("number", "Number", kNumbers);
  verb_block("voice", "Voice", kVoices);
  out["verb_negative_pct"] = share(verbs, is_negative_component);
  verb_block("form", "VerbForm", kNonFinite);
  return out;
}

FeatureMap compute_morphological(const Document& doc, const FeatureCatalog& catalog) {
  FeatureMap all = compute_morphological_all(doc);
  FeatureMap out;
  for (const std::string& id : catalog.ids(Category::kMorphological)) {
    const auto it = all.find(id);
    if (it == all.end()) throw DataError("morphological feature '" + id + "' is not known to the extractor");
    out.emplace(id, it->second);
  }
  return out;
}

}  // namespace cefr
