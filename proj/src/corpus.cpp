#include "cefr/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cefr/error.hpp"

namespace cefr {
namespace {

constexpr std::array<std::string_view, 17> kUpos = {"ADJ",  "ADP",   "ADV",  "AUX",   "CCONJ", "DET",
                                                    "INTJ", "NOUN",  "NUM",  "PART",  "PRON",  "PROPN",
                                                    "PUNCT", "SCONJ", "SYM", "VERB",  "X"};

std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string field(std::string_view v) { return v == "_" ? std::string() : std::string(v); }

std::map<std::string, std::string> parse_feats(std::string_view s, std::size_t line_no) {
  std::map<std::string, std::string> feats;
  if (s == "_" || s.empty()) return feats;
  for (std::string_view kv : split_view(s, '|')) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == kv.size()) {
      throw ParseError(line_no, "malformed FEATS entry '" + std::string(kv) + "'");
    }
    feats.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return feats;
}

bool parse_int(std::string_view s, int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void rstrip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::pair<std::string_view, Enum>, N>& table,
                std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw DataError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::array<std::pair<std::string_view, Level>, 4> kLevelNames = {
    {{"A2", Level::kA2}, {"B1", Level::kB1}, {"B2", Level::kB2}, {"C1", Level::kC1}}};
constexpr std::array<std::pair<std::string_view, TextType>, 4> kTextTypeNames = {
    {{"personal_letter", TextType::kPersonalLetter},
     {"narrative", TextType::kNarrative},
     {"semi_formal_letter", TextType::kSemiFormalLetter},
     {"argumentative", TextType::kArgumentative}}};
constexpr std::array<std::pair<std::string_view, Split>, 4> kSplitNames = {
    {{"train", Split::kTrain}, {"test1", Split::kTest1}, {"test2", Split::kTest2}, {"unlabeled", Split::kUnlabeled}}};

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

}  // namespace

std::string_view to_string(Level level) { return enum_name(level, kLevelNames); }
std::string_view to_string(TextType type) { return enum_name(type, kTextTypeNames); }
std::string_view to_string(Split split) { return enum_name(split, kSplitNames); }

Level parse_level(std::string_view s) { return parse_enum(s, kLevelNames, "level"); }
TextType parse_text_type(std::string_view s) { return parse_enum(s, kTextTypeNames, "text_type"); }
Split parse_split(std::string_view s) { return parse_enum(s, kSplitNames, "split"); }

bool is_universal_pos(std::string_view upos) {
  return std::find(kUpos.begin(), kUpos.end(), upos) != kUpos.end();
}

std::string_view Token::feat(std::string_view key) const {
  const auto it = feats.find(std::string(key));
  return it == feats.end() ? std::string_view() : std::string_view(it->second);
}

std::size_t Sentence::word_count() const {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_word(); }));
}

std::string Sentence::text() const {
  std::string out;
  for (const Token& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.form;
  }
  return out;
}

std::size_t Document::word_count() const {
  std::size_t n = 0;
  for (const Sentence& s : sentences) n += s.word_count();
  return n;
}

const Document* Corpus::find(std::string_view doc_id) const {
  const auto it = std::lower_bound(documents.begin(), documents.end(), doc_id,
                                   [](const Document& d, std::string_view id) { return d.doc_id < id; });
  if (it != documents.end() && it->doc_id == doc_id) return &*it;
  return nullptr;
}

std::vector<Sentence> parse_conllu(std::istream& in) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  std::size_t sentence_start = 1;

  auto flush = [&]() {
    if (!current.tokens.empty()) {
      sentences.push_back(std::move(current));
    } else if (!current.comments.empty()) {
      throw ParseError(sentence_start, "sentence without tokens");
    }
    current = Sentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    rstrip_cr(line);
    if (line.empty()) {
      flush();
      sentence_start = line_no + 1;
      continue;
    }
    if (line.front() == '#') {
      if (current.tokens.empty()) {
        current.comments.push_back(line);
      }
      continue;
    }
    const auto cols = split_view(line, '\t');
    if (cols.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
      // Multiword-token range or empty node: members/heads carry the annotation.
      continue;
    }
    Token tok;
    if (!parse_int(id, tok.index) || tok.index < 1) {
      throw ParseError(line_no, "invalid token id '" + std::string(id) + "'");
    }
    const int expected = current.tokens.empty() ? 1 : current.tokens.back().index + 1;
    if (tok.index != expected) {
      throw ParseError(line_no, "token index " + std::to_string(tok.index) + " out of order, expected " +
                                    std::to_string(expected));
    }
    tok.form = field(cols[1]);
    tok.lemma = field(cols[2]);
    tok.upos = field(cols[3]);
    if (!is_universal_pos(tok.upos)) {
      throw ParseError(line_no, "unknown UPOS '" + std::string(cols[3]) + "'");
    }
    tok.xpos = field(cols[4]);
    tok.feats = parse_feats(cols[5], line_no);
    tok.head = field(cols[6]);
    tok.deprel = field(cols[7]);
    tok.deps = field(cols[8]);
    tok.misc = field(cols[9]);
    if (current.tokens.empty()) sentence_start = line_no;
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return sentences;
}

std::vector<Sentence> parse_conllu_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in);
}

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences) {
  auto col = [](const std::string& s) -> const std::string& {
    static const std::string kAbsent = "_";
    return s.empty() ? kAbsent : s;
  };
  for (const Sentence& sentence : sentences) {
    for (const std::string& c : sentence.comments) out << c << '\n';
    for (const Token& t : sentence.tokens) {
      std::string feats;
      for (const auto& [k, v] : t.feats) {
        if (!feats.empty()) feats += '|';
        feats += k + "=" + v;
      }
      out << t.index << '\t' << col(t.form) << '\t' << col(t.lemma) << '\t' << col(t.upos) << '\t' << col(t.xpos)
          << '\t' << col(feats) << '\t' << col(t.head) << '\t' << col(t.deprel) << '\t' << col(t.deps) << '\t'
          << col(t.misc) << '\n';
    }
    out << '\n';
  }
}

std::string to_conllu(const std::vector<Sentence>& sentences) {
  std::ostringstream out;
  write_conllu(out, sentences);
  return out.str();
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("manifest " + manifest.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_array()) throw DataError("manifest must be a JSON array");
  std::vector<ManifestRow> rows;
  rows.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& r = j[i];
    try {
      ManifestRow row;
      row.doc_id = r.at("doc_id").get<std::string>();
      row.file = r.at("file").get<std::string>();
      row.meta.level = parse_level(r.at("level").get<std::string>());
      row.meta.text_type = parse_text_type(r.at("text_type").get<std::string>());
      row.meta.split = r.contains("split") ? parse_split(r.at("split").get<std::string>()) : Split::kUnlabeled;
      rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("manifest row " + std::to_string(i) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("manifest row " + std::to_string(i) + ": " + e.what());
    }
  }
  return rows;
}

void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const ManifestRow& r : rows) {
    j.push_back({{"doc_id", r.doc_id},
                 {"file", r.file},
                 {"level", to_string(r.meta.level)},
                 {"text_type", to_string(r.meta.text_type)},
                 {"split", to_string(r.meta.split)}});
  }
  std::ofstream out(manifest);
  if (!out) throw DataError("cannot write manifest " + manifest.string());
  out << j.dump(1) << '\n';
}

Corpus load_corpus(const std::filesystem::path& manifest, const std::filesystem::path& doc_root) {
  std::vector<ManifestRow> rows = read_manifest(manifest);
  std::set<std::string> seen;
  for (const ManifestRow& row : rows) {
    if (!seen.insert(row.doc_id).second) throw DataError("duplicate doc_id '" + row.doc_id + "'");
  }
  std::sort(rows.begin(), rows.end(), [](const ManifestRow& a, const ManifestRow& b) { return a.doc_id < b.doc_id; });

  Corpus corpus;
  corpus.manifest_path = manifest.string();
  corpus.documents.reserve(rows.size());
  for (ManifestRow& row : rows) {
    const std::filesystem::path path = doc_root / row.file;
    std::ifstream in(path);
    if (!in) throw DataError("document '" + row.doc_id + "': cannot open " + path.string());
    Document doc;
    doc.doc_id = std::move(row.doc_id);
    doc.meta = row.meta;
    try {
      doc.sentences = parse_conllu(in);
    } catch (const ParseError& e) {
      throw DataError("document '" + doc.doc_id + "' (" + path.string() + "): " + e.what());
    }
    if (doc.sentences.empty()) throw DataError("document '" + doc.doc_id + "' has no sentences");
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace cefr
