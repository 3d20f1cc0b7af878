#include <doctest.h>

#include <algorithm>
#include <map>

#include "cohref/errors.hpp"
#include "cohref/evaluation.hpp"
#include "cohref/grammar.hpp"
#include "fixtures.hpp"
#include "parse_oracle.hpp"

using namespace cohref;

namespace {

Lexicon small_lexicon() {
  return Lexicon({fixtures::term("red", 0, .8, .5), fixtures::term("green", 120, .8, .5),
                  fixtures::term("blue", 240, .8, .5), fixtures::term("dark blue", 240, .8, .25),
                  fixtures::term("grassy green", 110, .7, .4)});
}

std::vector<std::string> sorted_brackets(const std::vector<ParseTree>& trees) {
  std::vector<std::string> out;
  for (const auto& t : trees) out.push_back(t.bracketed());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> sorted_brackets(const std::vector<oracle::Derivation>& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(d.bracketed);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("grammar text parsing") {
  auto lex = small_lexicon();
  SUBCASE("lexicon expansion and uniform weights") {
    Pcfg p = default_pcfg(lex);
    const auto& g = p.grammar();
    auto clr = g.symbol("CLR");
    REQUIRE(clr);
    CHECK(g.rules_for(*clr).size() == lex.size());
    for (RuleId r : g.rules_for(*clr)) CHECK(p.weight(r) == doctest::Approx(1.0 / lex.size()));
    CHECK(g.name(g.start()) == "S");
    CHECK(g.terminal("dark blue").has_value());
  }
  SUBCASE("explicit weights, quotes and comments") {
    Pcfg p = parse_grammar(
        "# comment\nTOP -> X [0.25] | \"dark blue\" [0.75]\nX -> red  # trailing\n", lex);
    const auto& g = p.grammar();
    CHECK(g.name(g.start()) == "TOP");
    auto top = g.rules_for(g.start());
    REQUIRE(top.size() == 2);
    CHECK(p.weight(top[0]) == 0.25);
    CHECK(p.weight(top[1]) == 0.75);
    CHECK(g.rule_to_string(top[1]) == "TOP -> \"dark blue\"");
  }
  SUBCASE("weighted text round-trips") {
    Pcfg p = parse_grammar("S -> A [0.3] | B [0.7]\nA -> red\nB -> blue [1]\n", lex);
    Pcfg q = parse_grammar(p.to_text(), lex);
    CHECK(q.weights() == p.weights());
  }
  SUBCASE("errors") {
    CHECK_THROWS(parse_grammar("S -> A [0.3] | B\nA -> red\nB -> blue\n", lex));
    CHECK_THROWS_AS(parse_grammar("S -> A [0.3] | B [0.3]\nA -> red\nB -> blue\n", lex), GrammarError);
    CHECK_THROWS_AS(parse_grammar("S -> A\nA -> S\n", lex), GrammarError);
    CHECK_THROWS(parse_grammar("S -> \n", lex));
    CHECK_THROWS(parse_grammar("S red\n", lex));
    CHECK_THROWS(parse_grammar("", lex));
  }
}

TEST_CASE("tokenizer") {
  auto lex = small_lexicon();
  CHECK(tokenize("Dark Blue!", lex) == std::vector<std::string>{"dark blue"});
  CHECK(tokenize("the  dark, blue one", lex) ==
        std::vector<std::string>{"the", "dark blue", "one"});
  CHECK(tokenize("it's grassy green", lex) == std::vector<std::string>{"its", "grassy green"});
  CHECK(tokenize("grassy", lex) == std::vector<std::string>{"grassy"});
  CHECK(tokenize("  ...  ", lex).empty());
}

TEST_CASE("first sets") {
  Pcfg p = default_pcfg(small_lexicon());
  const auto& g = p.grammar();
  const auto& first_s = g.first_set(g.start());
  CHECK(first_s.count(*g.terminal("not")));
  CHECK(first_s.count(*g.terminal("grassy")));
  CHECK(first_s.count(*g.terminal("red")));
  CHECK(g.first_union().size() == first_s.size());
}

TEST_CASE("chart parse of the color grammar") {
  auto lex = small_lexicon();
  Pcfg p = default_pcfg(lex);
  auto trees = earley_parse(p, {"not", "grassy", "green"});
  REQUIRE(trees.size() == 1);
  CHECK(trees[0].bracketed() == "(S (NegP (NEG not) (CP (ADJ grassy) (CLR green))))");
  CHECK(trees[0].begin == 0);
  CHECK(trees[0].end == 3);
  CHECK(earley_parse(p, {"not", "grassy"}).size() == 1);
  CHECK(earley_parse(p, {"green", "not"}).empty());
  CHECK(earley_parse(p, {}).empty());
}

TEST_CASE("derivation counts follow the Catalan numbers") {
  Grammar g;
  g.add_rule("S", {"S", "S"});
  g.add_rule("S", {"a"});
  Pcfg p(g);
  const std::size_t catalan[] = {1, 1, 2, 5, 14, 42, 132, 429};
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<std::string> tokens(n, "a");
    CHECK(count_parses(p, tokens) == catalan[n - 1]);
    CHECK(earley_parse(p, tokens).size() == catalan[n - 1]);
  }
  CHECK_THROWS_AS(earley_parse(p, std::vector<std::string>(8, "a"), 100), GrammarError);
}

TEST_CASE("chart parse agrees with brute-force enumeration") {
  Grammar g;
  g.add_rule("S", {"S", "S"});
  g.add_rule("S", {"A"});
  g.add_rule("S", {"a", "B"});
  g.add_rule("A", {"a"});
  g.add_rule("A", {"A", "b"});
  g.add_rule("B", {"b"});
  g.add_rule("B", {"A"});
  Pcfg p(g, {0.3, 0.5, 0.2, 0.6, 0.4, 0.7, 0.3});
  const std::vector<std::string> alphabet{"a", "b"};
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      std::vector<std::string> tokens;
      for (auto k : idx) tokens.push_back(alphabet[k]);
      auto expected = oracle::Enumerator(p, tokens).all();
      auto got = earley_parse(p, tokens);
      REQUIRE(sorted_brackets(got) == sorted_brackets(expected));
      CHECK(count_parses(p, tokens) == expected.size());
      auto best = astar_best_parse(p, tokens);
      if (expected.empty()) {
        CHECK_FALSE(best.complete());
      } else {
        REQUIRE(best.complete());
        double max_p = 0;
        for (const auto& d : expected) max_p = std::max(max_p, d.probability);
        const auto& cp = std::get<CompleteParse>(best.value);
        CHECK(cp.best.probability == doctest::Approx(max_p).epsilon(1e-12));
        CHECK(cp.tree_count == expected.size());
      }
      std::size_t k = 0;
      while (k < n && ++idx[k] == alphabet.size()) idx[k++] = 0;
      if (k == n) break;
    }
  }
}

TEST_CASE("best parse probability is the product of its rule weights") {
  Pcfg p = default_pcfg(small_lexicon());
  auto out = astar_best_parse(p, {"not", "grassy", "green"});
  REQUIRE(out.complete());
  const auto& t = std::get<CompleteParse>(out.value).best;
  // S->NegP (1/2) NegP->NEG CP (1/2) NEG->not (1) CP->ADJ CLR (1/2)
  // ADJ->grassy (1/2) CLR->green (1/5)
  CHECK(t.probability == doctest::Approx(0.5 * 0.5 * 1.0 * 0.5 * 0.5 * 0.2).epsilon(1e-15));
}

TEST_CASE("partial parse recovery") {
  Pcfg p = default_pcfg(small_lexicon());
  SUBCASE("skips unknown words and keeps spans in input coordinates") {
    auto out = astar_best_parse(p, {"the", "dark blue", "one", "or", "red"});
    REQUIRE(out.partial());
    const auto& frags = std::get<PartialParse>(out.value).fragments;
    REQUIRE(frags.size() == 2);
    CHECK(frags[0].bracketed() == "(S (CP (CLR dark blue)))");
    CHECK(frags[0].begin == 1);
    CHECK(frags[0].end == 2);
    CHECK(frags[1].begin == 4);
  }
  SUBCASE("takes the longest parse at each start") {
    auto out = partial_parse_recover(p, {"um", "not", "green", "blue"});
    REQUIRE(out.partial());
    const auto& frags = std::get<PartialParse>(out.value).fragments;
    REQUIRE(frags.size() == 2);
    CHECK(frags[0].bracketed() == "(S (NegP (NEG not) (CP (CLR green))))");
    CHECK(frags[1].bracketed() == "(S (CP (CLR blue)))");
  }
  SUBCASE("fragments never overlap") {
    auto out = partial_parse_recover(p, {"red", "green", "x", "not", "blue", "grassy"});
    auto trees = out.trees();
    for (std::size_t k = 1; k < trees.size(); ++k) CHECK(trees[k - 1].end <= trees[k].begin);
  }
  SUBCASE("nothing usable") {
    CHECK(astar_best_parse(p, {"blah", "blah"}).none());
    CHECK(astar_best_parse(p, {"not"}).none());
    CHECK(astar_best_parse(p, {"not"}).trees().empty());
  }
}

TEST_CASE("tree interpretation") {
  auto lex = small_lexicon();
  Pcfg p = default_pcfg(lex);
  auto formula_of = [&](std::vector<std::string> toks, std::vector<std::string>* notes = nullptr) {
    auto out = astar_best_parse(p, toks);
    REQUIRE(out.complete());
    return tree_to_formula(std::get<CompleteParse>(out.value).best, lex, notes);
  };
  CHECK(formula_of({"red"}) == Formula::atom("red"));
  CHECK(formula_of({"not", "blue"}) == Formula::negate(Formula::atom("blue")));
  CHECK(formula_of({"dark blue"}) == Formula::atom("dark blue"));
  SUBCASE("adjective with a compound entry") {
    CHECK(formula_of({"grassy", "green"}) == Formula::atom("grassy green"));
  }
  SUBCASE("adjective without a compound entry is dropped with a note") {
    std::vector<std::string> notes;
    CHECK(formula_of({"super", "red"}, &notes) == Formula::atom("red"));
    CHECK(notes.size() == 1);
  }
  SUBCASE("bare adjective outside the lexicon cannot be interpreted") {
    auto out = astar_best_parse(p, {"not", "super"});
    REQUIRE(out.complete());
    CHECK_THROWS_AS(tree_to_formula(std::get<CompleteParse>(out.value).best, lex), InterpretationError);
  }
}

TEST_CASE("weight induction from a corpus") {
  Lexicon lex({fixtures::term("red", 0, .8, .5), fixtures::term("blue", 240, .8, .5)});
  // Two readings of "not red blue": not(red and blue) and (not red) and blue.
  Grammar g;
  g.add_rule("S", {"NegP"});
  g.add_rule("S", {"NegP", "CP"});
  g.add_rule("NegP", {"NEG", "CP"});
  g.add_rule("CP", {"CLR"});
  g.add_rule("CP", {"CP", "CP"});
  g.add_rule("NEG", {"not"});
  g.add_rule("CLR", {"red"});
  g.add_rule("CLR", {"blue"});
  const Formula favored =
      Formula::conj(Formula::negate(Formula::atom("red")), Formula::atom("blue"));
  DisplayContext ctx = fixtures::rgb_context(0);

  SUBCASE("trees share each utterance by the posterior they give the target") {
    DescriptionEvaluator stub = [&](const Formula& f, const DisplayContext&) {
      return f == favored ? PatchDistribution{0.9, 0.05, 0.05} : PatchDistribution{0.1, 0.45, 0.45};
    };
    auto rep = induce_pcfg_weights(g, lex, {{"not red blue", ctx}}, stub, 0.1);
    CHECK(rep.used == 1);
    CHECK(rep.unparsed == 0);
    // Hand counts: the favored tree weighs 0.9, the other 0.1.
    const std::vector<double> counts{0.1, 0.9, 1.0, 2.0, 0.1, 1.0, 1.0, 1.0};
    for (std::size_t r = 0; r < counts.size(); ++r) CHECK(rep.counts[r] == doctest::Approx(counts[r]));
    const auto& w = rep.pcfg.weights();
    CHECK(w[0] == doctest::Approx(0.2 / 1.2));
    CHECK(w[1] == doctest::Approx(1.0 / 1.2));
    CHECK(w[2] == doctest::Approx(1.0));
    CHECK(w[3] == doctest::Approx(2.1 / 2.3));
    CHECK(w[4] == doctest::Approx(0.2 / 2.3));
    CHECK(w[5] == doctest::Approx(1.0));
    CHECK(w[6] == doctest::Approx(0.5));
    CHECK(w[7] == doctest::Approx(0.5));
  }
  SUBCASE("zero target mass splits the utterance evenly") {
    DescriptionEvaluator zero = [](const Formula&, const DisplayContext&) {
      return PatchDistribution{0.0, 0.5, 0.5};
    };
    auto rep = induce_pcfg_weights(g, lex, {{"not red blue", ctx}}, zero, 0.1);
    CHECK(rep.counts[0] == doctest::Approx(0.5));
    CHECK(rep.counts[1] == doctest::Approx(0.5));
  }
  SUBCASE("unparseable rows are counted and skipped") {
    ColorSemantics sem(lex);
    Evaluator ev(sem);
    DescriptionEvaluator real = [&](const Formula& f, const DisplayContext& c) {
      return ev.eval_formula(f, c).probs;
    };
    auto rep = induce_pcfg_weights(g, lex, {{"purple", ctx}, {"not red", ctx}}, real, 0.1);
    CHECK(rep.unparsed == 1);
    CHECK(rep.used == 1);
    double total = 0;
    for (RuleId r : rep.pcfg.grammar().rules_for(rep.pcfg.grammar().start())) total += rep.pcfg.weight(r);
    CHECK(total == doctest::Approx(1.0));
  }
  SUBCASE("empty corpus is an error") {
    DescriptionEvaluator any = [](const Formula&, const DisplayContext&) {
      return PatchDistribution{1, 0, 0};
    };
    CHECK_THROWS(induce_pcfg_weights(g, lex, {}, any, 0.1));
  }
}
