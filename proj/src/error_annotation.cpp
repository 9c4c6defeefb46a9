#include "cefr/error_annotation.hpp"

#include <algorithm>
#include <fstream>
#include <future>

#include <httplib.h>

#include "cefr/error.hpp"

namespace cefr {
namespace {

std::string where(const Document& doc, std::size_t sentence) {
  return "document '" + doc.doc_id + "' sentence " + std::to_string(sentence);
}

struct SentenceCounts {
  std::size_t words = 0;
  std::size_t spell_edits = 0;
  std::size_t gram_edits = 0;
  std::size_t spell_words = 0;
  std::size_t gram_words = 0;
};

}  // namespace

std::string_view to_string(Tool tool) { return tool == Tool::kSpeller ? "speller" : "grammar"; }

Tool parse_tool(std::string_view s) {
  if (s == "speller") return Tool::kSpeller;
  if (s == "grammar") return Tool::kGrammar;
  throw DataError("unknown correction tool '" + std::string(s) + "'");
}

void validate_edits(const Document& doc, const std::vector<Edit>& edits) {
  for (const Edit& e : edits) {
    if (e.sentence_index >= doc.sentences.size()) {
      throw DataError(where(doc, e.sentence_index) + ": sentence index out of range (document has " +
                      std::to_string(doc.sentences.size()) + " sentences)");
    }
    const std::size_t n = doc.sentences[e.sentence_index].tokens.size();
    if (e.start >= e.end || e.end > n) {
      throw DataError(where(doc, e.sentence_index) + ": span [" + std::to_string(e.start) + "," +
                      std::to_string(e.end) + ") out of bounds for " + std::to_string(n) + " tokens");
    }
    if (e.tool == Tool::kSpeller && e.end - e.start != 1) {
      throw DataError(where(doc, e.sentence_index) + ": speller edits must cover exactly one token");
    }
  }
  for (const Tool tool : {Tool::kSpeller, Tool::kGrammar}) {
    std::vector<const Edit*> same;
    for (const Edit& e : edits) {
      if (e.tool == tool) same.push_back(&e);
    }
    std::sort(same.begin(), same.end(), [](const Edit* a, const Edit* b) {
      return a->sentence_index != b->sentence_index ? a->sentence_index < b->sentence_index : a->start < b->start;
    });
    for (std::size_t i = 1; i < same.size(); ++i) {
      if (same[i]->sentence_index == same[i - 1]->sentence_index && same[i]->start < same[i - 1]->end) {
        throw DataError(where(doc, same[i]->sentence_index) + ": overlapping " + std::string(to_string(tool)) +
                        " spans");
      }
    }
  }
}

std::vector<FeatureDef> error_feature_defs() {
  using enum Direction;
  const auto def = [](std::string id, std::string d, std::optional<Direction> dir) {
    return FeatureDef{std::move(id), Category::kError, std::move(d), dir};
  };
  return {
      def("spell_words_pct", "% of words corrected by the speller", kDecreasing),
      def("spell_sentences_pct", "% of sentences with speller corrections", std::nullopt),
      def("spell_edits_per_sentence", "speller corrections per sentence", std::nullopt),
      def("avg_spell_words_pct_per_sentence", "average % of speller-corrected words in a sentence", kDecreasing),
      def("gram_edits_per_word", "grammar corrections per word", kDecreasing),
      def("gram_edits_per_sentence", "grammar corrections per sentence", kDecreasing),
      def("gram_sentences_pct", "% of sentences with grammar corrections", std::nullopt),
      def("gram_span_words_pct", "% of words within grammar-corrected spans", kDecreasing),
      def("avg_gram_span_words_pct_per_sentence", "average % of words within grammar corrections in a sentence",
          kDecreasing),
  };
}

FeatureMap compute_error_features(const Document& doc, const std::vector<Edit>& edits) {
  validate_edits(doc, edits);
  std::vector<SentenceCounts> per(doc.sentences.size());
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) per[i].words = doc.sentences[i].word_count();
  for (const Edit& e : edits) {
    const auto& tokens = doc.sentences[e.sentence_index].tokens;
    std::size_t covered = 0;
    for (std::size_t k = e.start; k < e.end; ++k) {
      if (tokens[k].is_word()) ++covered;
    }
    SentenceCounts& c = per[e.sentence_index];
    if (e.tool == Tool::kSpeller) {
      ++c.spell_edits;
      c.spell_words += covered;
    } else {
      ++c.gram_edits;
      c.gram_words += covered;
    }
  }

  std::size_t words = 0, spell_edits = 0, gram_edits = 0, spell_words = 0, gram_words = 0;
  std::size_t spell_sentences = 0, gram_sentences = 0, scored_sentences = 0;
  double spell_pct_sum = 0.0, gram_pct_sum = 0.0;
  for (const SentenceCounts& c : per) {
    words += c.words;
    spell_edits += c.spell_edits;
    gram_edits += c.gram_edits;
    spell_words += c.spell_words;
    gram_words += c.gram_words;
    if (c.spell_edits > 0) ++spell_sentences;
    if (c.gram_edits > 0) ++gram_sentences;
    if (c.words > 0) {
      ++scored_sentences;
      spell_pct_sum += 100.0 * static_cast<double>(c.spell_words) / static_cast<double>(c.words);
      gram_pct_sum += 100.0 * static_cast<double>(c.gram_words) / static_cast<double>(c.words);
    }
  }
  if (words == 0) throw DataError("document '" + doc.doc_id + "' has no word tokens");

  const double w = static_cast<double>(words);
  const double s = static_cast<double>(doc.sentences.size());
  const double scored = static_cast<double>(scored_sentences);
  return {
      {"spell_words_pct", FeatureValue::ok(100.0 * static_cast<double>(spell_words) / w)},
      {"spell_sentences_pct", FeatureValue::ok(100.0 * static_cast<double>(spell_sentences) / s)},
      {"spell_edits_per_sentence", FeatureValue::ok(static_cast<double>(spell_edits) / s)},
      {"avg_spell_words_pct_per_sentence", FeatureValue::ok(spell_pct_sum / scored)},
      {"gram_edits_per_word", FeatureValue::ok(static_cast<double>(gram_edits) / w)},
      {"gram_edits_per_sentence", FeatureValue::ok(static_cast<double>(gram_edits) / s)},
      {"gram_sentences_pct", FeatureValue::ok(100.0 * static_cast<double>(gram_sentences) / s)},
      {"gram_span_words_pct", FeatureValue::ok(100.0 * static_cast<double>(gram_words) / w)},
      {"avg_gram_span_words_pct_per_sentence", FeatureValue::ok(gram_pct_sum / scored)},
  };
}

EditAnnotationSet edits_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("edits file must be a JSON object keyed by doc_id");
  EditAnnotationSet out;
  for (const auto& [doc_id, arr] : j.items()) {
    if (!arr.is_array()) throw DataError("edits for '" + doc_id + "' must be an array");
    std::vector<Edit> edits;
    for (const auto& e : arr) {
      try {
        Edit edit;
        edit.tool = parse_tool(e.at("tool").get<std::string>());
        edit.sentence_index = e.at("sentence_index").get<std::size_t>();
        edit.start = e.at("start").get<std::size_t>();
        edit.end = e.at("end").get<std::size_t>();
        edit.replacement = e.value("replacement", std::vector<std::string>{});
        edits.push_back(std::move(edit));
      } catch (const nlohmann::json::exception& ex) {
        throw DataError("malformed edit for '" + doc_id + "': " + ex.what());
      }
    }
    out.emplace(doc_id, std::move(edits));
  }
  return out;
}

nlohmann::json edits_to_json(const EditAnnotationSet& edits) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [doc_id, list] : edits) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Edit& e : list) {
      arr.push_back({{"tool", to_string(e.tool)},
                     {"sentence_index", e.sentence_index},
                     {"start", e.start},
                     {"end", e.end},
                     {"replacement", e.replacement}});
    }
    j[doc_id] = std::move(arr);
  }
  return j;
}

EditAnnotationSet load_edits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edits file " + path.string());
  try {
    return edits_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("edits file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void save_edits(const std::filesystem::path& path, const EditAnnotationSet& edits) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << edits_to_json(edits).dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CorrectionSpan> StubCorrector::correct(const std::string& sentence) const {
  const auto it = table_.find(sentence);
  return it == table_.end() ? std::vector<CorrectionSpan>{} : it->second;
}

HttpUrl split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos || url.substr(0, scheme) != "http") {
    throw ConfigError("unsupported endpoint URL '" + url + "' (expected http://host:port/path)");
  }
  const std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

std::vector<CorrectionSpan> parse_corrector_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("corrector response is not JSON: ") + e.what());
  }
  std::vector<CorrectionSpan> spans;
  try {
    for (const auto& e : j.at("edits")) {
      CorrectionSpan s;
      s.start = e.at("start").get<std::size_t>();
      s.end = e.at("end").get<std::size_t>();
      s.replacement = e.value("replacement", std::vector<std::string>{});
      spans.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrector response violates the edit schema: ") + e.what());
  }
  return spans;
}

HttpCorrector::HttpCorrector(CorrectorClientContract contract) : contract_(std::move(contract)) {
  split_url(contract_.endpoint);
}

std::vector<CorrectionSpan> HttpCorrector::correct(const std::string& sentence) const {
  const HttpUrl url = split_url(contract_.endpoint);
  httplib::Client client(url.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(contract_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(contract_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const std::string name(to_string(contract_.tool));
  const nlohmann::json request = {{"sentence", sentence}};
  auto res = client.Post(url.path, request.dump(), "application/json");
  if (!res) {
    throw UpstreamError(name, "request to " + contract_.endpoint + " failed: " + httplib::to_string(res.error()), true);
  }
  if (res->status != 200) {
    throw UpstreamError(name, contract_.endpoint + " answered HTTP " + std::to_string(res->status), res->status >= 500);
  }
  return parse_corrector_response(res->body);
}

std::vector<Edit> fetch_edits(const Document& doc, const CorrectorClient& client) {
  std::vector<Edit> edits;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    for (CorrectionSpan& span : client.correct(doc.sentences[i].text())) {
      edits.push_back({client.tool(), i, span.start, span.end, std::move(span.replacement)});
    }
  }
  validate_edits(doc, edits);
  return edits;
}

EditAnnotationSet annotate_corpus(const Corpus& corpus, const std::vector<const CorrectorClient*>& clients,
                                  std::size_t max_in_flight) {
  if (max_in_flight == 0) max_in_flight = 1;
  const std::size_t n = corpus.documents.size();
  std::vector<std::vector<Edit>> results(n);
  for (std::size_t begin = 0; begin < n; begin += max_in_flight) {
    const std::size_t end = std::min(n, begin + max_in_flight);
    std::vector<std::future<std::vector<Edit>>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] {
        std::vector<Edit> all;
        for (const CorrectorClient* c : clients) {
          std::vector<Edit> e = fetch_edits(corpus.documents[i], *c);
          all.insert(all.end(), e.begin(), e.end());
        }
        return all;
      }));
    }
    for (std::size_t i = begin; i < end; ++i) results[i] = batch[i - begin].get();
  }
  EditAnnotationSet out;
  for (std::size_t i = 0; i < n; ++i) out.emplace(corpus.documents[i].doc_id, std::move(results[i]));
  return out;
}

}  // namespace cefr
