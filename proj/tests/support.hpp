// Small builders shared by the unit and acceptance tests.
#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "cefr/corpus.hpp"
#include "cefr/random.hpp"

namespace cefr::testing {

inline Token make_token(int index, std::string form, std::string lemma, std::string upos,
                        std::map<std::string, std::string> feats = {}) {
  Token t;
  t.index = index;
  t.form = std::move(form);
  t.lemma = std::move(lemma);
  t.upos = std::move(upos);
  t.feats = std::move(feats);
  t.head = index == 1 ? "0" : "1";
  t.deprel = index == 1 ? "root" : "dep";
  return t;
}

/// Sentences of (form, lemma, upos) triples.
struct Triple {
  std::string form;
  std::string lemma;
  std::string upos;
};

inline Document make_document(const std::string& id, const std::vector<std::vector<Triple>>& sentences,
                              DocMeta meta = {}) {
  Document doc;
  doc.doc_id = id;
  doc.meta = meta;
  for (const auto& s : sentences) {
    Sentence sent;
    int i = 1;
    for (const Triple& t : s) sent.tokens.push_back(make_token(i++, t.form, t.lemma, t.upos));
    doc.sentences.push_back(std::move(sent));
  }
  return doc;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace cefr::testing
