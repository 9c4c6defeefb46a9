#include <doctest.h>

#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "cefr/error.hpp"
#include "cefr/error_annotation.hpp"
#include "support.hpp"

using namespace cefr;
using namespace cefr::testing;

namespace {

// Five sentences: 4, 3, 5, 2 and 1 words; sentence 0 ends with punctuation.
Document five_sentences() {
  return make_document(
      "e", {{{"Mina", "mina", "PRON"}, {"lähen", "minema", "VERB"}, {"koli", "kool", "NOUN"}, {"homme", "homme", "ADV"},
             {".", ".", "PUNCT"}},
            {{"See", "see", "PRON"}, {"on", "olema", "AUX"}, {"hea", "hea", "ADJ"}},
            {{"Ta", "tema", "PRON"}, {"ei", "ei", "AUX"}, {"tulnud", "tulema", "VERB"}, {"eile", "eile", "ADV"},
             {"kooli", "kool", "NOUN"}},
            {{"Tere", "tere", "INTJ"}, {"Mari", "Mari", "PROPN"}},
            {{"Aitäh", "aitäh", "INTJ"}}});
}

std::vector<Edit> mixed_edits() {
  return {
      {Tool::kSpeller, 0, 2, 3, {"kooli"}},
      {Tool::kGrammar, 0, 2, 5, {"kooli", "homme", "."}},  // covers 2 words + punctuation
      {Tool::kSpeller, 2, 2, 3, {"tulnud"}},
      {Tool::kSpeller, 2, 4, 5, {"kooli"}},
      {Tool::kGrammar, 2, 0, 2, {"Tema", "ei"}},
      {Tool::kGrammar, 3, 1, 2, {"Mari!"}},
  };
}

}  // namespace

TEST_SUITE("errors") {
  TEST_CASE("error features equal an independent recount") {
    const FeatureMap m = compute_error_features(five_sentences(), mixed_edits());
    // words 15, sentences 5; speller words 3 in 2 sentences; grammar edits 3 covering 2 + 2 + 1 words
    CHECK(m.at("spell_words_pct").value == doctest::Approx(100.0 * 3 / 15));
    CHECK(m.at("spell_sentences_pct").value == doctest::Approx(40.0));
    CHECK(m.at("spell_edits_per_sentence").value == doctest::Approx(3.0 / 5));
    CHECK(m.at("avg_spell_words_pct_per_sentence").value == doctest::Approx((25.0 + 0 + 40.0 + 0 + 0) / 5));
    CHECK(m.at("gram_edits_per_word").value == doctest::Approx(3.0 / 15));
    CHECK(m.at("gram_edits_per_sentence").value == doctest::Approx(3.0 / 5));
    CHECK(m.at("gram_sentences_pct").value == doctest::Approx(60.0));
    CHECK(m.at("gram_span_words_pct").value == doctest::Approx(100.0 * 5 / 15));
    CHECK(m.at("avg_gram_span_words_pct_per_sentence").value == doctest::Approx((50.0 + 0 + 40.0 + 50.0 + 0) / 5));
  }

  TEST_CASE("invalid edits are rejected with their location") {
    const Document d = five_sentences();
    CHECK_THROWS_AS(validate_edits(d, {{Tool::kSpeller, 9, 0, 1, {}}}), DataError);
    CHECK_THROWS_AS(validate_edits(d, {{Tool::kGrammar, 1, 2, 2, {}}}), DataError);
    CHECK_THROWS_AS(validate_edits(d, {{Tool::kGrammar, 1, 0, 4, {}}}), DataError);
    CHECK_THROWS_AS(validate_edits(d, {{Tool::kSpeller, 0, 0, 2, {}}}), DataError);
    CHECK_THROWS_AS(validate_edits(d, {{Tool::kGrammar, 0, 0, 3, {}}, {Tool::kGrammar, 0, 2, 4, {}}}), DataError);
    CHECK_NOTHROW(validate_edits(d, {{Tool::kGrammar, 0, 0, 3, {}}, {Tool::kSpeller, 0, 2, 3, {}}}));
  }

  TEST_CASE("edits JSON round trip") {
    EditAnnotationSet set = {{"e", mixed_edits()}, {"f", {}}};
    CHECK(edits_from_json(edits_to_json(set)) == set);
    CHECK_THROWS(edits_from_json(nlohmann::json::parse(R"({"e": [{"tool": "oracle"}]})")));
  }

  TEST_CASE("stub corrector returns its table") {
    const Document d = five_sentences();
    StubCorrector stub(Tool::kSpeller, {{d.sentences[0].text(), {{2, 3, {"kooli"}}}}});
    const auto edits = fetch_edits(d, stub);
    REQUIRE(edits.size() == 1);
    CHECK(edits[0] == Edit{Tool::kSpeller, 0, 2, 3, {"kooli"}});
  }

  TEST_CASE("corrector responses are schema-checked") {
    CHECK(parse_corrector_response(R"({"edits": []})").empty());
    CHECK_THROWS_AS(parse_corrector_response("not json"), DataError);
    CHECK_THROWS_AS(parse_corrector_response(R"({"edits": [{"start": 1}]})"), DataError);
    CHECK_THROWS_AS(split_url("ftp://x/y"), ConfigError);
    CHECK(split_url("http://localhost:9000/fix").path == "/fix");
  }

  TEST_CASE("recorded grammar corrector exchange replayed over HTTP") {
    const Document d = five_sentences();
    httplib::Server server;
    std::vector<std::string> seen;
    std::mutex mu;
    server.Post("/grammar", [&](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      {
        std::lock_guard lock(mu);
        seen.push_back(body.at("sentence").get<std::string>());
      }
      // recorded reply: reorder of a three-token span in the third sentence
      if (body.at("sentence") == "Ta ei tulnud eile kooli") {
        res.set_content(R"({"edits": [{"start": 2, "end": 5, "replacement": ["tulnud", "kooli", "eile"]}]})",
                        "application/json");
      } else {
        res.set_content(R"({"edits": []})", "application/json");
      }
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpCorrector client({"http://127.0.0.1:" + std::to_string(port) + "/grammar", std::chrono::milliseconds(5000),
                          Tool::kGrammar});
    const auto edits = fetch_edits(d, client);
    server.stop();
    t.join();
    REQUIRE(edits.size() == 1);
    CHECK(edits[0].tool == Tool::kGrammar);
    CHECK(edits[0].sentence_index == 2);
    CHECK(edits[0].end - edits[0].start == 3);
    CHECK(seen.size() == 5);
  }

  TEST_CASE("unreachable corrector raises an upstream error") {
    HttpCorrector client({"http://127.0.0.1:1/none", std::chrono::milliseconds(300), Tool::kSpeller});
    CHECK_THROWS_AS(fetch_edits(five_sentences(), client), UpstreamError);
  }
}
