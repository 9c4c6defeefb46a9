// Direct re-implementations of the lexical diversity formulas, written from
// their definitions and sharing no code with the extractor.
#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "support.hpp"

namespace cefr::testing {

struct DiversityOracle {
  double n = 0;
  double t = 0;
  double ttr = 0;
  double rttr = 0;
  std::optional<double> uber;
  std::optional<double> maas;
  std::optional<double> cvv;
  std::optional<double> mtld;
};

// Type-token ratio recomputed from scratch for every prefix of a segment.
inline double brute_factor_count(const std::vector<std::string>& seq, double threshold) {
  double factors = 0.0;
  std::size_t begin = 0;
  double last_ttr = 1.0;
  for (std::size_t end = begin + 1; end <= seq.size(); ++end) {
    std::set<std::string> types(seq.begin() + static_cast<std::ptrdiff_t>(begin),
                                seq.begin() + static_cast<std::ptrdiff_t>(end));
    last_ttr = static_cast<double>(types.size()) / static_cast<double>(end - begin);
    if (last_ttr <= threshold) {
      factors += 1.0;
      begin = end;
      last_ttr = 1.0;
    }
  }
  if (begin < seq.size()) factors += (1.0 - last_ttr) / (1.0 - threshold);
  return factors;
}

inline std::optional<double> brute_mtld(const std::vector<std::string>& seq, double threshold = 0.72) {
  const double fwd = brute_factor_count(seq, threshold);
  const std::vector<std::string> rev(seq.rbegin(), seq.rend());
  const double bwd = brute_factor_count(rev, threshold);
  if (fwd <= 0.0 || bwd <= 0.0) return std::nullopt;
  const double n = static_cast<double>(seq.size());
  return 0.5 * (n / fwd + n / bwd);
}

inline DiversityOracle diversity_oracle(const std::vector<Triple>& tokens) {
  std::vector<std::string> lemmas;
  std::set<std::string> verb_types;
  std::size_t verb_tokens = 0;
  for (const Triple& t : tokens) {
    if (t.upos == "PUNCT" || t.upos == "SYM") continue;
    lemmas.push_back(t.lemma);
    if (t.upos == "VERB" || t.upos == "AUX") {
      ++verb_tokens;
      verb_types.insert(t.lemma);
    }
  }
  DiversityOracle o;
  o.n = static_cast<double>(lemmas.size());
  o.t = static_cast<double>(std::set<std::string>(lemmas.begin(), lemmas.end()).size());
  o.ttr = o.t / o.n;
  o.rttr = o.t / std::sqrt(o.n);
  if (o.t < o.n) {
    const double l = std::log(o.n);
    o.uber = l * l / (l - std::log(o.t));
    o.maas = (l - std::log(o.t)) / (l * l);
  }
  if (verb_tokens > 0) o.cvv = static_cast<double>(verb_types.size()) / std::sqrt(2.0 * static_cast<double>(verb_tokens));
  o.mtld = brute_mtld(lemmas);
  return o;
}

/// Random tagged token sequence of the given length over a small vocabulary.
inline std::vector<Triple> random_tokens(Rng& rng, std::size_t length) {
  static const std::vector<std::string> upos = {"NOUN", "VERB", "AUX", "ADJ", "ADV", "PRON", "CCONJ", "PUNCT"};
  const std::size_t vocab = 3 + rng.below(120);
  std::vector<Triple> out;
  for (std::size_t i = 0; i < length; ++i) {
    const std::string lemma = "l" + std::to_string(rng.below(vocab));
    std::string u = upos[rng.below(upos.size())];
    out.push_back({lemma, lemma, u});
  }
  // at least one word token
  out.front().upos = "NOUN";
  return out;
}

}  // namespace cefr::testing
