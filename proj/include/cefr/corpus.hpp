#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cefr {

enum class Level { kA2 = 0, kB1 = 1, kB2 = 2, kC1 = 3 };
inline constexpr std::array<Level, 4> kLevels = {Level::kA2, Level::kB1, Level::kB2, Level::kC1};
inline constexpr std::size_t kLevelCount = kLevels.size();

enum class TextType { kPersonalLetter, kNarrative, kSemiFormalLetter, kArgumentative };
inline constexpr std::array<TextType, 4> kTextTypes = {TextType::kPersonalLetter, TextType::kNarrative,
                                                       TextType::kSemiFormalLetter, TextType::kArgumentative};

enum class Split { kTrain, kTest1, kTest2, kUnlabeled };

std::string_view to_string(Level level);
std::string_view to_string(TextType type);
std::string_view to_string(Split split);

/// Parsers for the closed enumerations; throw DataError on unknown strings.
Level parse_level(std::string_view s);
TextType parse_text_type(std::string_view s);
Split parse_split(std::string_view s);

inline int ordinal(Level level) { return static_cast<int>(level); }

struct Token {
  int index = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::map<std::string, std::string> feats;
  std::string head;
  std::string deprel;
  std::string deps;
  std::string misc;

  /// Value of a morphological attribute or empty when absent.
  std::string_view feat(std::string_view key) const;
  /// PUNCT and SYM tokens are kept in the document but are not words.
  bool is_word() const { return upos != "PUNCT" && upos != "SYM"; }

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<std::string> comments;

  std::size_t word_count() const;
  /// Tokens joined by single spaces, as sent to correction services.
  std::string text() const;

  bool operator==(const Sentence& other) const { return tokens == other.tokens; }
};

struct DocMeta {
  Level level = Level::kA2;
  TextType text_type = TextType::kPersonalLetter;
  Split split = Split::kUnlabeled;
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;
  DocMeta meta;

  std::size_t word_count() const;
};

struct Corpus {
  std::vector<Document> documents;
  std::string manifest_path;

  const Document* find(std::string_view doc_id) const;
};

bool is_universal_pos(std::string_view upos);

/// Parses CoNLL-U text. Multiword-token range lines and empty nodes are
/// skipped; "_" columns are read as absent. Throws ParseError with the line
/// number on malformed input.
std::vector<Sentence> parse_conllu(std::istream& in);
std::vector<Sentence> parse_conllu_string(std::string_view text);

/// Writes sentences back as CoNLL-U (syntactic words only).
void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences);
std::string to_conllu(const std::vector<Sentence>& sentences);

struct ManifestRow {
  std::string doc_id;
  std::string file;
  DocMeta meta;
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestRow>& rows);

/// Loads every manifest row relative to doc_root. Documents come back sorted
/// by doc_id.
Corpus load_corpus(const std::filesystem::path& manifest, const std::filesystem::path& doc_root);

}  // namespace cefr
