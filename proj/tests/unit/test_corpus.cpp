#include <doctest.h>

#include "cohref/corpus.hpp"
#include "cohref/errors.hpp"
#include "fixtures.hpp"

using namespace cohref;

namespace {

const char* kHeader = "utterance,h0,s0,l0,h1,s1,l1,h2,s2,l2,target_index\n";

}  // namespace

TEST_CASE("csv parsing") {
  auto rows = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\n\nx");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  CHECK(rows[1] == std::vector<std::string>{"1", "2", "3"});
  CHECK(rows[3] == std::vector<std::string>{"x"});
  auto multi = parse_csv("\"line one\nline two\",z\n");
  REQUIRE(multi.size() == 1);
  CHECK(multi[0][0] == "line one\nline two");
  CHECK_THROWS_AS(parse_csv("\"open"), FormatError);
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("q\"q") == "\"q\"\"q\"");
}

TEST_CASE("corpus ingestion") {
  SUBCASE("good rows in any column order, with percentages") {
    auto rep = ingest_cic_text(
        "target_index,utterance,h0,s0,l0,h1,s1,l1,h2,s2,l2\n"
        "2,\"the blue, not green\",0,80,50,120,0.8,0.5,240,80,50\n");
    REQUIRE(rep.items.size() == 1);
    CHECK(rep.items[0].utterance == "the blue, not green");
    CHECK(rep.items[0].context.target_index() == 2);
    CHECK(rep.items[0].context.patches[0].sat == doctest::Approx(0.8));
    CHECK(rep.items[0].context.patches[1].sat == doctest::Approx(0.8));
    CHECK(rep.skipped.empty());
  }
  SUBCASE("bad rows are skipped with their line") {
    auto rep = ingest_cic_text(std::string(kHeader) +
                               "red,0,.8,.5,120,.8,.5,240,.8,.5,0\n"
                               "red,0,.8,.5,120,.8,.5,240,.8,.5,3\n"
                               ",0,.8,.5,120,.8,.5,240,.8,.5,0\n"
                               "red,zero,.8,.5,120,.8,.5,240,.8,.5,0\n"
                               "red,0,180,.5,120,.8,.5,240,.8,.5,0\n");
    CHECK(rep.items.size() == 1);
    REQUIRE(rep.skipped.size() == 4);
    CHECK(rep.skipped[0].first == 3);
    CHECK(rep.skipped[0].second == "target_index must be 0, 1 or 2");
    CHECK(rep.skipped[1].second == "empty utterance");
    CHECK(rep.skipped[2].second.find("h0") != std::string::npos);
    CHECK(rep.skipped[3].first == 6);
  }
  SUBCASE("missing columns") {
    CHECK_THROWS_AS(ingest_cic_text("utterance,h0\nred,0\n"), FormatError);
  }
  SUBCASE("empty file") {
    auto rep = ingest_cic_text("");
    CHECK(rep.items.empty());
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.warnings[0] == "corpus file is empty");
  }
  SUBCASE("round trip") {
    auto rep = ingest_cic_text(std::string(kHeader) + "\"dark, blue\",10,.2,.3,40,.5,.6,70,.8,.9,1\n");
    auto again = ingest_cic_text(corpus_to_csv(rep.items));
    REQUIRE(again.items.size() == 1);
    CHECK(again.items[0].utterance == "dark, blue");
    CHECK(again.items[0].context.patches == rep.items[0].context.patches);
  }
  CHECK_THROWS(ingest_cic("/nonexistent/corpus.csv"));
}

TEST_CASE("parse coverage classes") {
  ColorSemantics sem(fixtures::default_lexicon());
  Pcfg pcfg = default_pcfg(sem.lexicon());
  auto cls = [&](const std::string& u) {
    return classify_parse(astar_best_parse(pcfg, tokenize(u, sem.lexicon())));
  };
  CHECK(cls("not grassy green") == Coverage::Complete);
  CHECK(cls("the red one") == Coverage::OneFragment);
  CHECK(cls("red or blue") == Coverage::TwoFragments);
  CHECK(cls("red and blue and green") == Coverage::ThreeOrMoreFragments);
  CHECK(cls("the left one") == Coverage::NoParse);
  CHECK(to_string(Coverage::OneFragment) == "one_nopp");
}

TEST_CASE("first utterance evaluation") {
  ColorSemantics sem(fixtures::default_lexicon());
  Pcfg pcfg = default_pcfg(sem.lexicon());
  DisplayContext ctx({ColorPatch(0, 0.8, 0.5), ColorPatch(120, 0.8, 0.5), ColorPatch(230, 0.7, 0.5)}, 0);
  std::vector<CorpusItem> corpus{{"red", ctx}, {"green", ctx}, {"the red one", ctx}, {"left", ctx}};
  auto rep = first_utterance_eval(corpus, sem, pcfg);
  CHECK(rep.total == 4);
  CHECK(rep.evaluated == 2);
  CHECK(rep.successes == 1);
  CHECK(rep.success_rate() == 0.5);
  CHECK(rep.coverage_rate(Coverage::NoParse) == 0.25);
  auto j = rep.to_json();
  CHECK(j["coverage"]["one_nopp"]["count"] == 1);

  auto none = first_utterance_eval({{"left", ctx}}, sem, pcfg);
  CHECK_FALSE(none.success_rate());
  CHECK(none.to_json()["success_rate"] == "n/a");
}

TEST_CASE("synthetic corpus") {
  ColorSemantics sem(fixtures::default_lexicon());
  Pcfg pcfg = default_pcfg(sem.lexicon());
  auto rows = synthetic_corpus(sem, 100, 4, ContextMode::Mixed);
  REQUIRE(rows.size() == 100);
  for (const auto& r : rows)
    CHECK(r.utterance == sem.best_identifying_expression(r.context, r.context.target_index()).label);
  auto rep = first_utterance_eval(rows, sem, pcfg);
  CHECK(rep.coverage[0] == 100);
  CHECK(synthetic_corpus(sem, 5, 4, ContextMode::Mixed)[3].utterance == rows[3].utterance);
}
