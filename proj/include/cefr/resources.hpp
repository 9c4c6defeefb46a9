#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cefr {

/// Counts syllable nuclei: maximal vowel groups, where a group is split
/// before every vowel that does not form a listed digraph (diphthong or long
/// vowel) with the single vowel preceding it.
class Syllabifier {
 public:
  explicit Syllabifier(std::vector<std::string> digraphs);

  /// Built-in Estonian digraph list; identical to data/resources/diphthongs.txt.
  static const Syllabifier& estonian();
  static Syllabifier from_file(const std::filesystem::path& path);

  std::size_t count(std::string_view word) const;

  const std::vector<std::string>& digraphs() const { return digraphs_; }

 private:
  std::vector<std::string> digraphs_;
  std::set<std::u32string> pairs_;
};

std::size_t count_syllables(std::string_view word);

struct LexicalResources {
  std::unordered_map<std::string, int> frequency_ranks;
  std::unordered_set<std::string> function_words;
  std::unordered_map<std::string, int> abstractness;

  /// Rank of a lemma, 0 when unranked.
  int rank(std::string_view lemma) const;
  bool is_function_word(std::string_view form, std::string_view lemma) const;
  /// Rating in {1,2,3}, 0 when unrated.
  int abstractness_of(std::string_view lemma) const;

  /// Throws DataError on non-positive ranks or ratings outside {1,2,3}.
  void validate() const;
};

/// Directory layout: frequency.tsv, function_words.txt, abstractness.tsv and
/// (optionally) diphthongs.txt.
struct ResourcePaths {
  std::filesystem::path frequency;
  std::filesystem::path function_words;
  std::filesystem::path abstractness;
  std::filesystem::path diphthongs;

  static ResourcePaths in_directory(const std::filesystem::path& dir);
};

inline constexpr std::size_t kMinFrequencyEntries = 5000;

/// Loads all resource files; the frequency list must cover at least
/// kMinFrequencyEntries lemmas so that every rare-k tier is meaningful.
LexicalResources load_resources(const ResourcePaths& paths);

void write_resources(const std::filesystem::path& dir, const LexicalResources& res,
                     const std::vector<std::string>& digraphs);

}  // namespace cefr
