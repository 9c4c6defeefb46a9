#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cefr/corpus.hpp"
#include "cefr/error.hpp"
#include "cefr/random.hpp"
#include "support.hpp"

using namespace cefr;
namespace fs = std::filesystem;

namespace {

const char* kTwoSentences =
    "# sent_id = 1\n"
    "# text = Ma elan Tallinnas.\n"
    "1\tMa\tmina\tPRON\t_\tCase=Nom|Number=Sing|Person=1|PronType=Prs\t2\tnsubj\t_\t_\n"
    "2\telan\telama\tVERB\t_\tMood=Ind|Number=Sing|Person=1|Tense=Pres|VerbForm=Fin|Voice=Act\t0\troot\t_\t_\n"
    "3\tTallinnas\tTallinn\tPROPN\t_\tCase=Ine|Number=Sing\t2\tobl\t_\tSpaceAfter=No\n"
    "4\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n"
    "\n"
    "1-2\tPole\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tPo\tei\tAUX\t_\tPolarity=Neg\t2\taux\t_\t_\n"
    "2\tle\tolema\tVERB\t_\tConnegative=Yes\t0\troot\t_\t_\n"
    "2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n"
    "\n";

// Fifty sentences with varied features, generated from a fixed seed.
std::string fifty_sentence_fixture() {
  const std::vector<std::string> upos = {"NOUN", "VERB", "ADJ", "PRON", "ADP", "CCONJ", "PUNCT"};
  const std::vector<std::string> feats = {"_", "Case=Nom|Number=Sing", "Case=Gen|Number=Plur",
                                          "Mood=Ind|Tense=Past|VerbForm=Fin", "AdpType=Post",
                                          "Degree=Cmp|Case=Par|Number=Sing"};
  Rng rng(5);
  std::ostringstream out;
  for (int s = 1; s <= 50; ++s) {
    out << "# sent_id = " << s << "\n";
    const int n = 3 + static_cast<int>(rng.below(12));
    for (int i = 1; i <= n; ++i) {
      out << i << "\tsõna" << rng.below(40) << "\tlemma" << rng.below(30) << "\t" << upos[rng.below(upos.size())]
          << "\t_\t" << feats[rng.below(feats.size())] << "\t" << (i == 1 ? 0 : 1) << "\t"
          << (i == 1 ? "root" : "dep") << "\t_\t_\n";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("parses tokens, features and skips multiword and empty nodes") {
    const auto sents = parse_conllu_string(kTwoSentences);
    REQUIRE(sents.size() == 2);
    CHECK(sents[0].tokens.size() == 4);
    CHECK(sents[0].tokens[2].lemma == "Tallinn");
    CHECK(sents[0].tokens[2].feat("Case") == "Ine");
    CHECK(sents[0].tokens[2].feat("Degree").empty());
    CHECK(sents[0].word_count() == 3);
    CHECK(sents[0].comments.size() == 2);
    REQUIRE(sents[1].tokens.size() == 2);
    CHECK(sents[1].tokens[0].form == "Po");
    CHECK(sents[1].tokens[1].feat("Connegative") == "Yes");
  }

  TEST_CASE("round trip on a 50-sentence fixture preserves token structure") {
    const auto first = parse_conllu_string(fifty_sentence_fixture());
    REQUIRE(first.size() == 50);
    const auto second = parse_conllu_string(to_conllu(first));
    CHECK(first == second);
    CHECK(to_conllu(second) == to_conllu(first));
  }

  TEST_CASE("malformed input reports the offending line") {
    const std::string bad =
        "1\tMa\tmina\tPRON\t_\t_\t0\troot\t_\t_\n"
        "2\telan\telama\tVERB\t_\t_\t1\n";
    try {
      parse_conllu_string(bad);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_conllu_string("1\tMa\tmina\tNOTATAG\t_\t_\t0\troot\t_\t_\n"), ParseError);
    CHECK_THROWS_AS(parse_conllu_string("x\tMa\tmina\tPRON\t_\t_\t0\troot\t_\t_\n"), ParseError);
    CHECK_THROWS_AS(parse_conllu_string("1\tMa\tmina\tPRON\t_\tCaseNom\t0\troot\t_\t_\n"), ParseError);
  }

  TEST_CASE("empty input yields no sentences") { CHECK(parse_conllu_string("").empty()); }

  TEST_CASE("level, text type and split names round trip") {
    for (Level l : {Level::kA2, Level::kB1, Level::kB2, Level::kC1}) CHECK(parse_level(to_string(l)) == l);
    for (TextType t : {TextType::kPersonalLetter, TextType::kNarrative, TextType::kSemiFormalLetter,
                       TextType::kArgumentative}) {
      CHECK(parse_text_type(to_string(t)) == t);
    }
    for (Split s : {Split::kTrain, Split::kTest1, Split::kTest2, Split::kUnlabeled}) CHECK(parse_split(to_string(s)) == s);
    CHECK_THROWS(parse_level("C2"));
  }

  TEST_CASE("manifest and corpus loading") {
    const fs::path dir = fs::temp_directory_path() / "cefr_corpus_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "docs");
    {
      std::ofstream(dir / "docs" / "b.conllu") << kTwoSentences;
      std::ofstream(dir / "docs" / "a.conllu") << kTwoSentences;
    }
    std::vector<ManifestRow> rows = {
        {"doc-b", "docs/b.conllu", {Level::kC1, TextType::kArgumentative, Split::kTrain}},
        {"doc-a", "docs/a.conllu", {Level::kA2, TextType::kNarrative, Split::kTest1}},
    };
    write_manifest(dir / "manifest.json", rows);
    const auto back = read_manifest(dir / "manifest.json");
    REQUIRE(back.size() == 2);
    CHECK(back[0].doc_id == "doc-b");
    CHECK(back[1].meta.split == Split::kTest1);

    const Corpus c = load_corpus(dir / "manifest.json", dir);
    REQUIRE(c.documents.size() == 2);
    CHECK(c.documents[0].doc_id == "doc-a");
    CHECK(c.find("doc-b")->meta.level == Level::kC1);
    CHECK(c.find("missing") == nullptr);

    rows.push_back({"doc-a", "docs/a.conllu", {}});
    write_manifest(dir / "dup.json", rows);
    CHECK_THROWS_AS(load_corpus(dir / "dup.json", dir), DataError);
    fs::remove_all(dir);
  }
}
