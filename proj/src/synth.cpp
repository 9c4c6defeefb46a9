#include "cefr/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "cefr/error.hpp"
#include "cefr/random.hpp"

namespace cefr::synth {
namespace {

using enum Level;
using enum TextType;

// Stream ids keep the generators independent of each other's draw counts.
constexpr std::uint64_t kStreamFeatureShape = 1;
constexpr std::uint64_t kStreamRows = 2;
constexpr std::uint64_t kStreamDocs = 3;

std::string doc_id_for(const DesignCell& c, std::size_t i) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s-%s-%s-%04zu", std::string(to_string(c.split)).c_str(),
                std::string(to_string(c.level)).c_str(), std::string(to_string(c.text_type)).c_str(), i + 1);
  return buf;
}

// ---- planted matrix ------------------------------------------------------

struct Shape {
  Planted kind;
  std::array<double, kLevelCount> level_mean{};
  std::array<double, 4> type_effect{};  // indexed by TextType
  // Per (level, type) overrides of the cell mean, applied after the above.
  std::vector<std::tuple<Level, TextType, double>> cell_mean{};
  double sd = 1.0;
  bool exponentiate = false;
};

double cell_mean(const Shape& s, Level l, TextType t) {
  for (const auto& [cl, ct, m] : s.cell_mean) {
    if (cl == l && ct == t) return m;
  }
  return s.level_mean[ordinal(l)] + s.type_effect[static_cast<int>(t)];
}

// ---- documents -----------------------------------------------------------

constexpr std::array<const char*, 40> kSyllables = {
    "ka", "la", "ma", "sa", "ta", "va", "pe", "le", "me", "se", "te", "ke", "ri", "li",
    "ni", "si", "ti", "ki", "ko", "lo", "mo", "so", "to", "ju", "lu", "mu", "su", "tu",
    "kõ", "lõ", "mä", "lä", "nä", "pä", "sö", "lö", "kü", "mü", "nu", "ra"};

struct ClosedWord {
  const char* lemma;
  const char* upos;
  const char* feats;  // "" or "K=V|K=V"
};

// Closed-class vocabulary shared by the generator and the function-word list.
constexpr std::array<ClosedWord, 44> kClosed = {{
    {"mina", "PRON", "PronType=Prs"},      {"sina", "PRON", "PronType=Prs"},
    {"tema", "PRON", "PronType=Prs"},      {"meie", "PRON", "PronType=Prs"},
    {"teie", "PRON", "PronType=Prs"},      {"nemad", "PRON", "PronType=Prs"},
    {"see", "PRON", "PronType=Dem"},       {"too", "PRON", "PronType=Dem"},
    {"selline", "PRON", "PronType=Dem"},   {"mis", "PRON", "PronType=Int,Rel"},
    {"kes", "PRON", "PronType=Int,Rel"},   {"milline", "PRON", "PronType=Int,Rel"},
    {"keegi", "PRON", "PronType=Ind"},     {"miski", "PRON", "PronType=Ind"},
    {"mõni", "PRON", "PronType=Ind"},      {"ise", "PRON", "PronType=Refl"},
    {"ja", "CCONJ", ""},                   {"ning", "CCONJ", ""},
    {"aga", "CCONJ", ""},                  {"või", "CCONJ", ""},
    {"kuid", "CCONJ", ""},                 {"et", "SCONJ", ""},
    {"kui", "SCONJ", ""},                  {"sest", "SCONJ", ""},
    {"kuna", "SCONJ", ""},                 {"nagu", "SCONJ", ""},
    {"kuigi", "SCONJ", ""},                {"juures", "ADP", "AdpType=Post"},
    {"kohta", "ADP", "AdpType=Post"},      {"järgi", "ADP", "AdpType=Post"},
    {"pärast", "ADP", "AdpType=Post"},     {"vastu", "ADP", "AdpType=Post"},
    {"ilma", "ADP", "AdpType=Prep"},       {"enne", "ADP", "AdpType=Prep"},
    {"üle", "ADP", "AdpType=Prep"},        {"ka", "ADV", ""},
    {"väga", "ADV", ""},                   {"siis", "ADV", ""},
    {"nüüd", "ADV", ""},                   {"juba", "ADV", ""},
    {"veel", "ADV", ""},                   {"olema", "AUX", ""},
    {"ei", "AUX", "Polarity=Neg"},         {"kaks", "NUM", "NumType=Card"},
}};

constexpr std::array<const char*, 6> kProperNouns = {"Tallinn", "Tartu", "Narva", "Mari", "Jaan", "Eesti"};

constexpr std::array<const char*, 15> kCases = {"Nom", "Gen", "Par", "Ill", "Ine", "Ela", "All", "Ade",
                                                "Abl", "Tra", "Ter", "Ess", "Abe", "Com", "Add"};
constexpr std::array<const char*, 15> kCaseSuffix = {"", "", "t", "sse", "s", "st", "le", "l",
                                                     "lt", "ks", "ni", "na", "ta", "ga", "de"};
constexpr std::array<double, 15> kCaseSimple = {45, 20, 15, 5, 5, 1, 4, 4, 1, 0, 0, 0, 0, 0, 0};
constexpr std::array<double, 15> kCaseRich = {25, 22, 15, 5, 6, 4, 3, 4, 2, 5, 1, 2, 1, 4, 1};

constexpr std::size_t kClosedRanks = kClosed.size() + kProperNouns.size();
constexpr std::size_t kContentRanks = 6000;

enum ContentPos { kNoun, kVerb, kAdj, kAdv };

// Content rank r (1-based past the closed class) has part of speech by r mod 10.
ContentPos pos_of_rank(std::size_t r) {
  const std::size_t m = r % 10;
  if (m < 5) return kNoun;
  if (m < 7) return kVerb;
  if (m < 9) return kAdj;
  return kAdv;
}

std::string content_lemma(std::size_t r) {
  std::string out;
  std::size_t x = r + kSyllables.size();
  std::vector<std::size_t> digits;
  while (x > 0) {
    digits.push_back(x % kSyllables.size());
    x /= kSyllables.size();
  }
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) out += kSyllables[*it];
  if (pos_of_rank(r) == kVerb) out += "ma";
  if (pos_of_rank(r) == kAdj) out += "ne";
  return out;
}

std::size_t pick(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

bool chance(Rng& rng, double p) { return rng.uniform() < p; }

int rounded_normal(Rng& rng, double mean, double sd, int lo) {
  return std::max(lo, static_cast<int>(std::lround(rng.normal(mean, sd))));
}

class DocumentBuilder {
 public:
  DocumentBuilder(Rng& rng, Level level, TextType type) : rng_(rng), level_(level), type_(type) {
    t_ = ordinal(level) / 3.0;
  }

  std::vector<Sentence> build() {
    const std::array<double, 4> sent_count = {7.5, 10.0, 12.5, 17.0};
    const std::array<double, 4> sent_len = {6.0, 8.5, 10.5, 13.5};
    const int n_sent = rounded_normal(rng_, sent_count[ordinal(level_)] + (type_ == kArgumentative ? 1.0 : 0.0), 1.8, 3);
    std::vector<Sentence> out;
    for (int s = 0; s < n_sent; ++s) {
      Sentence sentence;
      const int words = rounded_normal(rng_, sent_len[ordinal(level_)], 2.5, 3);
      for (int w = 0; w < words; ++w) add_word(sentence);
      push(sentence, ".", ".", "PUNCT", "");
      finish(sentence, out.size());
      out.push_back(std::move(sentence));
    }
    return out;
  }

 private:
  void add_word(Sentence& s) {
    const bool letter = type_ == kPersonalLetter || type_ == kSemiFormalLetter;
    const double l = ordinal(level_);
    // NOUN VERB ADJ ADV PRON CCONJ SCONJ ADP NUM PROPN
    const std::array<double, 10> w = {25,
                                      17,
                                      5 + 2.5 * l,
                                      6 + 1.5 * l,
                                      15 - 2.5 * l + (letter ? 4 : 0),
                                      4 + 0.5 * l,
                                      1.5 + 1.5 * l,
                                      1.5 + 1.0 * l,
                                      2,
                                      5 - 1.2 * l};
    switch (pick(rng_, w)) {
      case 0: nominal(s, "NOUN", content(kNoun)); break;
      case 1: verb(s); break;
      case 2: adjective(s); break;
      case 3:
        if (chance(rng_, 0.5)) {
          closed(s, "ADV");
        } else {
          push(s, content(kAdv), content_last_, "ADV", "");
        }
        break;
      case 4: pronoun(s); break;
      case 5: closed(s, "CCONJ"); break;
      case 6:
        push(s, ",", ",", "PUNCT", "");
        closed(s, "SCONJ");
        break;
      case 7: closed(s, "ADP", chance(rng_, 0.45 + 0.12 * l) ? "AdpType=Post" : "AdpType=Prep"); break;
      case 8: push(s, "kaks", "kaks", "NUM", "Case=Nom|NumType=Card|Number=Sing"); break;
      default: {
        const char* name = kProperNouns[rng_.below(kProperNouns.size())];
        push(s, name, name, "PROPN", "Case=Nom|Number=Sing");
      }
    }
  }

  // Returns the surface stem and records the lemma in content_last_.
  std::string content(ContentPos pos) {
    std::size_t r;
    if (!used_[pos].empty() && chance(rng_, 0.35 - 0.1 * t_)) {
      r = used_[pos][rng_.below(used_[pos].size())];
    } else {
      const std::array<double, 4> max_rank = {700, 1800, 3800, 7500};
      const double x = std::exp(rng_.uniform() * std::log(max_rank[ordinal(level_)]));
      r = static_cast<std::size_t>(x);
      r = r - r % 10;
      const std::array<std::size_t, 4> lo = {0, 5, 7, 9};
      const std::array<std::size_t, 4> width = {5, 2, 2, 1};
      r += lo[pos] + rng_.below(width[pos]);
      if (r == 0) r = 10;
      used_[pos].push_back(r);
    }
    content_last_ = content_lemma(r);
    return content_last_;
  }

  std::string case_feats(std::string& form, double plural_bias) {
    std::array<double, 15> w{};
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1 - t_) * kCaseSimple[i] + t_ * kCaseRich[i];
    const std::size_t c = pick(rng_, w);
    const bool plural = chance(rng_, 0.12 + 0.08 * t_ + plural_bias);
    if (plural) form += "de";
    form += kCaseSuffix[c];
    return std::string("Case=") + kCases[c] + "|Number=" + (plural ? "Plur" : "Sing");
  }

  void nominal(Sentence& s, const char* upos, std::string lemma) {
    std::string form = lemma;
    const std::string feats = case_feats(form, 0.0);
    push(s, form, lemma, upos, feats);
  }

  void adjective(Sentence& s) {
    const std::string lemma = content(kAdj);
    std::string form = lemma;
    std::string feats = case_feats(form, 0.0);
    const std::array<double, 3> degree = {90 - 8 * t_, 6 + 4 * t_, 4 + 4 * t_};
    static constexpr std::array<const char*, 3> kDegree = {"Pos", "Cmp", "Sup"};
    feats = std::string("Degree=") + kDegree[pick(rng_, degree)] + "|" + feats;
    push(s, form, lemma, "ADJ", feats);
  }

  void pronoun(Sentence& s) {
    const bool letter = type_ == kPersonalLetter || type_ == kSemiFormalLetter;
    // personal, demonstrative, interrogative/relative, indefinite, reflexive
    const std::array<double, 5> w = {45 - 15 * t_ + (letter ? 15 : 0), 25, 8 + 12 * t_, 6 + 4 * t_, 3};
    static constexpr std::array<const char*, 5> kTypes = {"Prs", "Dem", "Int,Rel", "Ind", "Refl"};
    const std::string type = kTypes[pick(rng_, w)];
    std::vector<const ClosedWord*> options;
    for (const ClosedWord& cw : kClosed) {
      if (std::string(cw.upos) == "PRON" && std::string(cw.feats) == "PronType=" + type) options.push_back(&cw);
    }
    const ClosedWord& cw = *options[rng_.below(options.size())];
    std::string form = cw.lemma;
    const std::string feats = case_feats(form, -0.05);
    push(s, form, cw.lemma, "PRON", feats + "|" + cw.feats);
  }

  void closed(Sentence& s, const char* upos, const char* feats_filter = nullptr) {
    std::vector<const ClosedWord*> options;
    for (const ClosedWord& cw : kClosed) {
      if (std::string(cw.upos) != upos) continue;
      if (feats_filter != nullptr && std::string(cw.feats) != feats_filter) continue;
      options.push_back(&cw);
    }
    const ClosedWord& cw = *options[rng_.below(options.size())];
    push(s, cw.lemma, cw.lemma, upos, cw.feats);
  }

  void verb(Sentence& s) {
    const bool letter = type_ == kPersonalLetter || type_ == kSemiFormalLetter;
    const bool aux = chance(rng_, 0.2);
    const std::string lemma = aux ? "olema" : content(kVerb);
    const char* upos = aux ? "AUX" : "VERB";
    if (!aux && !chance(rng_, 0.86 - 0.2 * t_)) {
      // Non-finite: infinitive, supine, converb, participle.
      const std::array<double, 4> w = {40, 30, 5 + 20 * t_, 20};
      static constexpr std::array<const char*, 4> kForms = {"Inf", "Sup", "Conv", "Part"};
      static constexpr std::array<const char*, 4> kSuffix = {"da", "ma", "des", "nud"};
      const std::size_t f = pick(rng_, w);
      const std::string stem = lemma.substr(0, lemma.size() - 2);
      push(s, stem + kSuffix[f], lemma, upos, std::string("VerbForm=") + kForms[f]);
      return;
    }
    const bool negative = chance(rng_, 0.05 + 0.06 * std::sin(3.0 * t_));
    if (negative) push(s, "ei", "ei", "AUX", "Polarity=Neg");
    const std::array<double, 4> mood = {88 - 6 * t_, letter ? 6.0 : 2.0, 4 + 5 * t_, t_ > 0.9 ? 1.5 : 0.0};
    static constexpr std::array<const char*, 4> kMoods = {"Ind", "Imp", "Cnd", "Qot"};
    const bool past = chance(rng_, type_ == kNarrative ? 0.7 : 0.25);
    const std::array<double, 3> person = {letter ? 45.0 : 20.0, letter ? 15.0 : 3.0, letter ? 40.0 : 77.0};
    const bool plural = chance(rng_, 0.15 + 0.15 * t_);
    const bool passive = chance(rng_, 0.03 + 0.08 * t_);
    std::string feats;
    if (negative) feats += "Connegative=Yes|";
    feats += std::string("Mood=") + kMoods[pick(rng_, mood)];
    feats += std::string("|Number=") + (plural ? "Plur" : "Sing");
    feats += "|Person=" + std::to_string(pick(rng_, person) + 1);
    feats += std::string("|Tense=") + (past ? "Past" : "Pres");
    feats += "|VerbForm=Fin";
    feats += std::string("|Voice=") + (passive ? "Pass" : "Act");
    const std::string stem = lemma.substr(0, lemma.size() - 2);
    const std::string form = aux ? (past ? "oli" : "on") : stem + (negative ? "" : past ? "s" : "b");
    push(s, form, lemma, upos, feats);
  }

  void push(Sentence& s, const std::string& form, const std::string& lemma, const char* upos, const std::string& feats) {
    Token t;
    t.index = static_cast<int>(s.tokens.size()) + 1;
    t.form = form;
    t.lemma = lemma;
    t.upos = upos;
    std::size_t pos = 0;
    while (pos < feats.size()) {
      std::size_t bar = feats.find('|', pos);
      if (bar == std::string::npos) bar = feats.size();
      const std::string kv = feats.substr(pos, bar - pos);
      const std::size_t eq = kv.find('=');
      if (eq != std::string::npos) t.feats[kv.substr(0, eq)] = kv.substr(eq + 1);
      pos = bar + 1;
    }
    t.head = t.index == 1 ? "0" : "1";
    t.deprel = t.index == 1 ? "root" : "dep";
    s.tokens.push_back(std::move(t));
  }

  void finish(Sentence& s, std::size_t index) {
    if (!s.tokens.empty() && !s.tokens.front().form.empty()) {
      std::string& f = s.tokens.front().form;
      if (f[0] >= 'a' && f[0] <= 'z') f[0] = static_cast<char>(f[0] - 'a' + 'A');
    }
    s.comments = {"# sent_id = " + std::to_string(index + 1), "# text = " + s.text()};
  }

  Rng& rng_;
  Level level_;
  TextType type_;
  double t_;
  std::array<std::vector<std::size_t>, 4> used_;
  std::string content_last_;
};

std::vector<Edit> make_edits(Rng& rng, const Document& doc) {
  std::vector<Edit> edits;
  const double l = ordinal(doc.meta.level);
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const std::vector<Token>& tokens = doc.sentences[si].tokens;
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
      if (tokens[ti].is_word() && chance(rng, 0.07 - 0.015 * l)) {
        edits.push_back({Tool::kSpeller, si, ti, ti + 1, {tokens[ti].form}});
      }
    }
    std::size_t cursor = 0;
    while (cursor + 1 < tokens.size()) {
      if (!chance(rng, 0.18 - 0.03 * l)) {
        ++cursor;
        continue;
      }
      const std::size_t len = std::min<std::size_t>(1 + rng.below(3), tokens.size() - cursor);
      std::vector<std::string> repl;
      for (std::size_t k = cursor + len; k > cursor; --k) repl.push_back(tokens[k - 1].form);
      edits.push_back({Tool::kGrammar, si, cursor, cursor + len, repl});
      cursor += len + 1;
    }
  }
  return edits;
}

}  // namespace

std::vector<DesignCell> exam_design() {
  return {
      {kA2, kPersonalLetter, Split::kTrain, 105},  {kA2, kNarrative, Split::kTrain, 45},
      {kB1, kPersonalLetter, Split::kTrain, 75},   {kB1, kNarrative, Split::kTrain, 75},
      {kB2, kPersonalLetter, Split::kTrain, 50},   {kB2, kSemiFormalLetter, Split::kTrain, 50},
      {kB2, kArgumentative, Split::kTrain, 50},    {kC1, kArgumentative, Split::kTrain, 150},
      {kA2, kPersonalLetter, Split::kTest1, 15},   {kA2, kNarrative, Split::kTest1, 15},
      {kB1, kPersonalLetter, Split::kTest1, 15},   {kB1, kNarrative, Split::kTest1, 15},
      {kB2, kPersonalLetter, Split::kTest1, 10},   {kB2, kSemiFormalLetter, Split::kTest1, 10},
      {kB2, kArgumentative, Split::kTest1, 10},    {kC1, kArgumentative, Split::kTest1, 30},
  };
}

std::vector<DesignCell> scaled_design(double scale) {
  if (!(scale > 0.0)) throw ConfigError("design scale must be positive");
  std::vector<DesignCell> out = exam_design();
  for (DesignCell& c : out) {
    c.count = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(static_cast<double>(c.count) * scale)));
  }
  return out;
}

std::string_view to_string(Planted p) {
  switch (p) {
    case Planted::kMonotone: return "monotone";
    case Planted::kGenreOnly: return "genre_only";
    case Planted::kExceptionA: return "exception_a";
    case Planted::kExceptionB: return "exception_b";
    case Planted::kConfounded: return "confounded";
    case Planted::kNoise: return "noise";
  }
  return "unknown";
}

std::vector<std::string> SyntheticMatrix::ids_of(Planted kind) const {
  std::vector<std::string> out;
  for (const PlantedFeature& p : planted) {
    if (p.kind == kind) out.push_back(p.id);
  }
  return out;
}

SyntheticMatrix make_matrix(const MatrixOptions& options) {
  Rng shape_rng(derive_seed(options.seed, kStreamFeatureShape));
  std::vector<std::pair<std::string, Shape>> shapes;
  char name[32];

  for (std::size_t i = 0; i < options.monotone; ++i) {
    Shape s{Planted::kMonotone};
    const double step = shape_rng.uniform(0.6, 1.2) * (i % 2 == 0 ? 1.0 : -1.0);
    const double base = shape_rng.uniform(-2.0, 2.0);
    for (std::size_t l = 0; l < kLevelCount; ++l) s.level_mean[l] = base + step * static_cast<double>(l);
    s.exponentiate = i % 3 == 2;
    if (s.exponentiate) s.sd = 0.5;
    if (s.exponentiate) {
      for (double& m : s.level_mean) m *= 0.5;
    }
    std::snprintf(name, sizeof name, "mono_%02zu", i + 1);
    shapes.emplace_back(name, s);
  }
  for (TextType t : {kPersonalLetter, kNarrative, kSemiFormalLetter}) {
    Shape s{Planted::kGenreOnly};
    s.type_effect[static_cast<int>(t)] = 2.0;
    shapes.emplace_back("genre_" + std::string(to_string(t)), s);
  }
  {
    Shape a{Planted::kExceptionA, {0.0, 1.0, 2.0, 0.5}};
    a.sd = 0.5;
    shapes.emplace_back("turn_c1", a);
    Shape b{Planted::kExceptionA, {0.0, 1.0, 0.4, 1.6}};
    b.sd = 0.5;
    shapes.emplace_back("zigzag_b2", b);
  }
  {
    Shape a{Planted::kExceptionB, {0.0, 1.0, 2.0, 3.0}};
    a.sd = 0.5;
    a.cell_mean = {{kB2, kSemiFormalLetter, 1.05}};
    shapes.emplace_back("steady_b2_semi", a);
    Shape b{Planted::kExceptionB, {0.0, 1.0, 2.0, 3.0}};
    b.sd = 0.5;
    b.cell_mean = {{kA2, kNarrative, 0.95}};
    shapes.emplace_back("steady_a2_narr", b);
  }
  {
    Shape a{Planted::kConfounded, {0.0, 1.0, 2.0, 3.0}};
    a.sd = 0.5;
    a.cell_mean = {{kA2, kNarrative, 1.0}, {kB2, kSemiFormalLetter, 1.0}};
    shapes.emplace_back("confound_a2_b2", a);
    Shape b{Planted::kConfounded, {0.0, 0.5, 1.0, 1.5}};
    b.type_effect[static_cast<int>(kPersonalLetter)] = 1.5;
    shapes.emplace_back("confound_letters", b);
  }
  for (std::size_t i = 0; i < options.noise; ++i) {
    std::snprintf(name, sizeof name, "noise_%02zu", i + 1);
    shapes.emplace_back(name, Shape{Planted::kNoise});
  }

  SyntheticMatrix out;
  std::vector<FeatureDef> defs;
  for (const auto& [id, s] : shapes) {
    out.planted.push_back({id, s.kind});
    defs.push_back({id, Category::kLexical, "synthetic " + std::string(to_string(s.kind)) + " feature", std::nullopt});
    out.matrix.feature_ids.push_back(id);
  }
  out.catalog = FeatureCatalog(std::move(defs));
  out.matrix.catalog_hash = out.catalog.hash();

  Rng rng(derive_seed(options.seed, kStreamRows));
  for (const DesignCell& c : exam_design()) {
    for (std::size_t i = 0; i < c.count; ++i) {
      FeatureRow row{doc_id_for(c, i), DocMeta{c.level, c.text_type, c.split}, {}, {}};
      for (std::size_t j = 0; j < shapes.size(); ++j) {
        const Shape& s = shapes[j].second;
        double v = rng.normal(cell_mean(s, c.level, c.text_type), s.sd);
        if (s.exponentiate) v = std::exp(v);
        std::uint8_t degenerate = 0;
        if (s.kind == Planted::kNoise && shapes[j].first == "noise_01" && rng.uniform() < options.degenerate_rate) {
          v = 0.0;
          degenerate = 1;
        }
        row.values.push_back(v);
        row.degenerate.push_back(degenerate);
      }
      out.matrix.rows.push_back(std::move(row));
    }
  }
  std::sort(out.matrix.rows.begin(), out.matrix.rows.end(),
            [](const FeatureRow& a, const FeatureRow& b) { return a.doc_id < b.doc_id; });
  return out;
}

LexicalResources make_resources() {
  LexicalResources res;
  int rank = 1;
  for (const ClosedWord& cw : kClosed) {
    res.frequency_ranks.emplace(cw.lemma, rank++);
    if (std::string(cw.upos) != "NUM") res.function_words.insert(cw.lemma);
  }
  for (const char* p : kProperNouns) res.frequency_ranks.emplace(p, rank++);
  for (std::size_t r = 1; r <= kContentRanks; ++r) {
    const std::string lemma = content_lemma(r);
    res.frequency_ranks.emplace(lemma, static_cast<int>(kClosedRanks + r));
    if (pos_of_rank(r) == kNoun) {
      // Rarer nouns lean abstract.
      res.abstractness.emplace(lemma, r < 800 ? 1 + static_cast<int>(r % 3 == 0) : r < 3000 ? 2 : 3 - static_cast<int>(r % 4 == 0));
    }
  }
  res.validate();
  return res;
}

SyntheticCorpus make_corpus(const CorpusOptions& options) {
  SyntheticCorpus out;
  Rng rng(derive_seed(options.seed, kStreamDocs));
  for (const DesignCell& c : options.design) {
    for (std::size_t i = 0; i < c.count; ++i) {
      Document doc;
      doc.doc_id = doc_id_for(c, i);
      doc.meta = {c.level, c.text_type, c.split};
      doc.sentences = DocumentBuilder(rng, c.level, c.text_type).build();
      out.edits[doc.doc_id] = make_edits(rng, doc);
      out.manifest.push_back({doc.doc_id, "docs/" + doc.doc_id + ".conllu", doc.meta});
      out.corpus.documents.push_back(std::move(doc));
    }
  }
  std::sort(out.corpus.documents.begin(), out.corpus.documents.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  return out;
}

void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus, const LexicalResources& res) {
  std::filesystem::create_directories(dir / "docs");
  for (const Document& d : corpus.corpus.documents) {
    write_file_atomic(dir / "docs" / (d.doc_id + ".conllu"), "# newdoc id = " + d.doc_id + "\n" + to_conllu(d.sentences));
  }
  write_manifest(dir / "manifest.json", corpus.manifest);
  save_edits(dir / "edits.json", corpus.edits);
  write_resources(dir / "resources", res, Syllabifier::estonian().digraphs());
}

}  // namespace cefr::synth
