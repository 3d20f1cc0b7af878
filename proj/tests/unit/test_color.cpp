#include <doctest.h>

#include <map>

#include "cohref/color.hpp"
#include "cohref/errors.hpp"
#include "fixtures.hpp"

using namespace cohref;

TEST_CASE("patch wraps hue and clamps channels") {
  ColorPatch p(370.0, 1.5, -0.2);
  CHECK(p.hue == doctest::Approx(10.0));
  CHECK(p.sat == 1.0);
  CHECK(p.light == 0.0);
  CHECK(ColorPatch(-30.0, 0.5, 0.5).hue == doctest::Approx(330.0));
}

TEST_CASE("hue distance takes the short way round") {
  CHECK(hue_distance(350.0, 10.0) == doctest::Approx(20.0));
  CHECK(hue_distance(0.0, 180.0) == doctest::Approx(180.0));
  CHECK(hue_distance(90.0, 90.0) == 0.0);
  for (double a = 0; a < 360; a += 37)
    for (double b = 0; b < 360; b += 41) {
      CHECK(hue_distance(a, b) == doctest::Approx(hue_distance(b, a)));
      CHECK(hue_distance(a, b) <= 180.0);
    }
}

TEST_CASE("display context target handling") {
  auto ctx = fixtures::rgb_context(2);
  CHECK(ctx.target_index() == 2);
  auto hidden = ctx.without_target();
  CHECK_FALSE(hidden.target.has_value());
  CHECK(hidden.patches == ctx.patches);
  CHECK_THROWS_AS(hidden.target_index(), ValidationError);
  CHECK_THROWS_AS(DisplayContext(ctx.patches, 3), ValidationError);
}

TEST_CASE("lexicon validation and lookup") {
  Lexicon lex({fixtures::term("zeta", 0, .5, .5), fixtures::term("alpha", 10, .5, .5),
               fixtures::term("dark blue", 240, .5, .3)});
  CHECK(lex.at(0).label == "alpha");
  CHECK(lex.at(2).label == "zeta");
  CHECK(lex.max_words() == 2);
  CHECK(lex.contains("dark blue"));
  CHECK_THROWS_AS(lex.find("mauve"), UnknownTerm);
  CHECK_THROWS_AS(Lexicon(std::vector<ColorTerm>{}), LexiconError);
  CHECK_THROWS_AS(Lexicon({fixtures::term("a", 0, .5, .5), fixtures::term("a", 9, .5, .5)}),
                  LexiconError);
  CHECK_THROWS_AS(Lexicon({fixtures::term("a", 0, .5, .5, 0.0)}), LexiconError);
}

TEST_CASE("lexicon file parsing") {
  const std::string text =
      R"({"label":"Red","hue":0,"sat":0.8,"light":0.5,"spread_hue":15,"spread_sat":0.3,"spread_light":0.2})"
      "\n\n"
      R"({"label":"blue","hue":240,"sat":0.7,"light":0.5,"spread_hue":20,"spread_sat":0.4,"spread_light":0.2})"
      "\n";
  auto lex = parse_lexicon(text);
  REQUIRE(lex.size() == 2);
  CHECK(lex.contains("red"));
  auto again = parse_lexicon(lexicon_to_jsonl(lex));
  CHECK(again.size() == 2);
  CHECK(again.find("blue").spread_hue == 20.0);

  SUBCASE("bad json reports its line") {
    try {
      parse_lexicon(text + "{oops\n");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("missing field") {
    CHECK_THROWS_AS(parse_lexicon(R"({"label":"x","hue":0})"), FormatError);
  }
  SUBCASE("duplicate after lowercasing") {
    CHECK_THROWS_AS(parse_lexicon(text + R"({"label":"RED","hue":0,"sat":0.8,"light":0.5,"spread_hue":15,"spread_sat":0.3,"spread_light":0.2})"),
                    LexiconError);
  }
}

TEST_CASE("gaussian applicability matches hand values") {
  GaussianApplicability g;
  ColorTerm t = fixtures::term("t", 0, 0.5, 0.5, 10, 0.1, 0.1);
  CHECK(g.applicability(t, ColorPatch(0, 0.5, 0.5)) == doctest::Approx(1.0));
  // one spread away on one channel
  CHECK(g.applicability(t, ColorPatch(10, 0.5, 0.5)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // one spread on two channels
  CHECK(g.applicability(t, ColorPatch(10, 0.6, 0.5)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // hue wraps: 355 is 5 degrees from 0
  CHECK(g.applicability(t, ColorPatch(355, 0.5, 0.5)) == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
}

TEST_CASE("literal listener normalizes applicability") {
  ColorSemantics sem(fixtures::default_lexicon());
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    DisplayContext ctx({ColorPatch(uniform01(rng) * 360, uniform01(rng), uniform01(rng)),
                        ColorPatch(uniform01(rng) * 360, uniform01(rng), uniform01(rng)),
                        ColorPatch(uniform01(rng) * 360, uniform01(rng), uniform01(rng))});
    for (const auto& t : sem.lexicon().terms()) {
      double a[3], total = 0;
      for (int i = 0; i < 3; ++i) total += a[i] = fixtures::kernel(t, ctx.patches[i]);
      if (!(total > 0)) continue;
      auto p = sem.literal_listener(t, ctx);
      for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(a[i] / total).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate evidence is reported") {
  ColorSemantics sem(Lexicon({fixtures::term("pin", 0, 0.5, 0.5, 0.01, 0.001, 0.001)}));
  DisplayContext far({ColorPatch(180, 0.0, 0.0), ColorPatch(170, 1.0, 1.0), ColorPatch(90, 0, 1)});
  CHECK_THROWS_AS(sem.literal_listener(sem.lexicon().at(0), far), DegenerateEvidence);
  CHECK_THROWS_AS(sem.speaker_distribution(far, 0), DegenerateEvidence);
}

TEST_CASE("speaker distribution follows listener mass raised to rationality") {
  auto lex = fixtures::rgb_lexicon();
  DisplayContext ctx({ColorPatch(10, 0.8, 0.5), ColorPatch(100, 0.8, 0.5), ColorPatch(250, 0.8, 0.5)});
  for (double alpha : {1.0, 2.0}) {
    ColorSemantics sem(lex, std::make_shared<GaussianApplicability>(), {alpha, 0.5});
    auto d = sem.speaker_distribution(ctx, 0);
    std::vector<double> expect;
    double total = 0;
    for (const auto& t : sem.lexicon().terms()) {
      double a[3], s = 0;
      for (int i = 0; i < 3; ++i) s += a[i] = fixtures::kernel(t, ctx.patches[i]);
      expect.push_back(std::pow(a[0] / s, alpha));
      total += expect.back();
    }
    double sum = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      CHECK(d[k] == doctest::Approx(expect[k] / total).epsilon(1e-12));
      sum += d[k];
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("best identifying expression") {
  ColorSemantics sem(fixtures::rgb_lexicon());
  auto ctx = fixtures::rgb_context();
  CHECK(sem.best_identifying_expression(ctx, 0).label == "red");
  CHECK(sem.best_identifying_expression(ctx, 1).label == "green");
  CHECK(sem.best_identifying_expression(ctx, 2, {"blue"}).label != "blue");
  CHECK_THROWS_AS(sem.best_identifying_expression(ctx, 0, {"red", "green", "blue"}), ExhaustedLexicon);

  SUBCASE("ties go to the first label") {
    ColorSemantics twin(Lexicon({fixtures::term("scarlet", 0, .8, .5), fixtures::term("crimson", 0, .8, .5)}));
    CHECK(twin.best_identifying_expression(ctx, 0).label == "crimson");
  }
}

TEST_CASE("merely true descriptions") {
  ColorSemantics sem(fixtures::default_lexicon());
  DisplayContext ctx({ColorPatch(330, 0.85, 0.68), ColorPatch(200, 0.7, 0.6), ColorPatch(60, 0.8, 0.5)}, 0);
  const auto& target = ctx.patches[0];

  std::map<std::string, double> weight;
  double total = 0;
  for (const auto& t : sem.lexicon().terms()) {
    const double a = fixtures::kernel(t, target);
    if (a >= 0.5) total += weight[t.label] = a;
  }
  REQUIRE(weight.size() >= 2);

  Rng rng(11);
  std::map<std::string, int> seen;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++seen[sem.sample_true_description(ctx, 0, rng).label];
  for (const auto& [label, count] : seen) REQUIRE(weight.count(label));
  for (const auto& [label, w] : weight) {
    CHECK(static_cast<double>(seen[label]) / n == doctest::Approx(w / total).epsilon(0.03));
  }

  SUBCASE("reproducible for a fixed seed") {
    Rng a(3), b(3);
    for (int i = 0; i < 100; ++i)
      CHECK(sem.sample_true_description(ctx, 0, a).label == sem.sample_true_description(ctx, 0, b).label);
  }
  SUBCASE("falls back to the most applicable unused term") {
    std::set<std::string> used;
    for (const auto& [label, w] : weight) used.insert(label);
    Rng r(1);
    const auto& got = sem.sample_true_description(ctx, 0, r, used);
    double best = -1;
    std::string best_label;
    for (const auto& t : sem.lexicon().terms()) {
      if (used.count(t.label)) continue;
      const double a = fixtures::kernel(t, target);
      if (a > best) best = a, best_label = t.label;
    }
    CHECK(got.label == best_label);
  }
}

TEST_CASE("uniform01 stays in range") {
  Rng rng(42);
  double lo = 1, hi = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}
