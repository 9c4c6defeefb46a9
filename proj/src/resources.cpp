#include "cefr/resources.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "cefr/error.hpp"
#include "cefr/text.hpp"

namespace cefr {
namespace {

constexpr std::u32string_view kVowels = U"aeiouõäöüy";

bool is_vowel(char32_t c) { return kVowels.find(text::to_lower(c)) != std::u32string_view::npos; }

const std::vector<std::string>& estonian_digraphs() {
  static const std::vector<std::string> list = {
      // long vowels
      "aa", "ee", "ii", "oo", "uu", "õõ", "ää", "öö", "üü",
      // diphthongs
      "ai", "ei", "oi", "ui", "õi", "äi", "öi", "üi", "au", "eu", "iu", "ou", "õu", "äu", "ae", "oe", "õe", "äe",
      "öe", "ea", "õa", "ao", "eo", "io", "õo", "äo"};
  return list;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open resource file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    lines.emplace_back(t);
  }
  return lines;
}

std::unordered_map<std::string, int> read_int_table(const std::filesystem::path& path) {
  std::unordered_map<std::string, int> table;
  std::size_t n = 0;
  for (const std::string& line : read_lines(path)) {
    ++n;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path.string() + ": entry " + std::to_string(n) + " lacks a TAB separator");
    }
    const std::string key = line.substr(0, tab);
    const std::string_view num = text::trim(std::string_view(line).substr(tab + 1));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw DataError(path.string() + ": entry " + std::to_string(n) + " has a non-integer value");
    }
    // First occurrence wins for duplicated lemmas.
    table.emplace(key, value);
  }
  return table;
}

}  // namespace

Syllabifier::Syllabifier(std::vector<std::string> digraphs) : digraphs_(std::move(digraphs)) {
  for (const std::string& d : digraphs_) {
    std::u32string u = text::decode_utf8(text::lower(d));
    if (u.size() != 2 || !is_vowel(u[0]) || !is_vowel(u[1])) {
      throw DataError("digraph '" + d + "' must consist of exactly two vowels");
    }
    pairs_.insert(std::move(u));
  }
}

const Syllabifier& Syllabifier::estonian() {
  static const Syllabifier instance(estonian_digraphs());
  return instance;
}

Syllabifier Syllabifier::from_file(const std::filesystem::path& path) { return Syllabifier(read_lines(path)); }

std::size_t Syllabifier::count(std::string_view word) const {
  std::u32string w = text::decode_utf8(word);
  for (char32_t& c : w) c = text::to_lower(c);
  std::size_t nuclei = 0;
  std::size_t nucleus_len = 0;  // vowels in the current nucleus, 0 outside vowel groups
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!is_vowel(w[i])) {
      nucleus_len = 0;
      continue;
    }
    if (nucleus_len == 1 && pairs_.contains(std::u32string{w[i - 1], w[i]})) {
      nucleus_len = 2;
      continue;
    }
    ++nuclei;
    nucleus_len = 1;
  }
  return nuclei;
}

std::size_t count_syllables(std::string_view word) { return Syllabifier::estonian().count(word); }

int LexicalResources::rank(std::string_view lemma) const {
  const auto it = frequency_ranks.find(std::string(lemma));
  return it == frequency_ranks.end() ? 0 : it->second;
}

bool LexicalResources::is_function_word(std::string_view form, std::string_view lemma) const {
  return function_words.contains(std::string(lemma)) || function_words.contains(text::lower(form));
}

int LexicalResources::abstractness_of(std::string_view lemma) const {
  const auto it = abstractness.find(std::string(lemma));
  return it == abstractness.end() ? 0 : it->second;
}

void LexicalResources::validate() const {
  for (const auto& [lemma, r] : frequency_ranks) {
    if (r < 1) throw DataError("frequency rank of '" + lemma + "' must be positive");
  }
  for (const auto& [lemma, a] : abstractness) {
    if (a < 1 || a > 3) throw DataError("abstractness rating of '" + lemma + "' must be 1, 2 or 3");
  }
}

ResourcePaths ResourcePaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "frequency.tsv", dir / "function_words.txt", dir / "abstractness.tsv", dir / "diphthongs.txt"};
}

LexicalResources load_resources(const ResourcePaths& paths) {
  LexicalResources res;
  res.frequency_ranks = read_int_table(paths.frequency);
  if (res.frequency_ranks.size() < kMinFrequencyEntries) {
    throw DataError(paths.frequency.string() + ": frequency list has " + std::to_string(res.frequency_ranks.size()) +
                    " entries, at least " + std::to_string(kMinFrequencyEntries) + " required");
  }
  for (std::string& w : read_lines(paths.function_words)) res.function_words.insert(std::move(w));
  res.abstractness = read_int_table(paths.abstractness);
  res.validate();
  return res;
}

void write_resources(const std::filesystem::path& dir, const LexicalResources& res,
                     const std::vector<std::string>& digraphs) {
  std::filesystem::create_directories(dir);
  const ResourcePaths paths = ResourcePaths::in_directory(dir);

  std::vector<std::pair<std::string, int>> ranks(res.frequency_ranks.begin(), res.frequency_ranks.end());
  std::sort(ranks.begin(), ranks.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });
  std::ofstream freq(paths.frequency);
  for (const auto& [lemma, r] : ranks) freq << lemma << '\t' << r << '\n';

  std::vector<std::string> fw(res.function_words.begin(), res.function_words.end());
  std::sort(fw.begin(), fw.end());
  std::ofstream fwo(paths.function_words);
  for (const std::string& w : fw) fwo << w << '\n';

  std::vector<std::pair<std::string, int>> abs(res.abstractness.begin(), res.abstractness.end());
  std::sort(abs.begin(), abs.end());
  std::ofstream abo(paths.abstractness);
  for (const auto& [lemma, a] : abs) abo << lemma << '\t' << a << '\n';

  std::ofstream dio(paths.diphthongs);
  for (const std::string& d : digraphs) dio << d << '\n';
}

}  // namespace cefr
