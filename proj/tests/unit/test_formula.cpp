#include <doctest.h>

#include "cohref/errors.hpp"
#include "cohref/formula.hpp"

using namespace cohref;

namespace {

Formula random_formula(unsigned& state, int depth) {
  state = state * 1103515245u + 12345u;
  const unsigned pick = (state >> 16) % (depth > 0 ? 4 : 1);
  const char* labels[] = {"red", "dark blue", "hot pink", "gold"};
  switch (pick) {
    case 0: return Formula::atom(labels[(state >> 8) % 4]);
    case 1: return Formula::conj(random_formula(state, depth - 1), random_formula(state, depth - 1));
    case 2: return Formula::disj(random_formula(state, depth - 1), random_formula(state, depth - 1));
    default: return Formula::negate(random_formula(state, depth - 1));
  }
}

}  // namespace

TEST_CASE("formula text form") {
  auto f = Formula::conj(Formula::atom("hot pink"), Formula::negate(Formula::atom("red")));
  CHECK(f.to_string() == "and(atom(hot pink), not(atom(red)))");
  CHECK(Formula::disj(Formula::atom("a"), Formula::atom("b")).to_string() == "or(atom(a), atom(b))");
}

TEST_CASE("text form round-trips") {
  unsigned state = 7;
  for (int i = 0; i < 200; ++i) {
    auto f = random_formula(state, 4);
    CHECK(parse_formula(f.to_string()) == f);
  }
  CHECK_THROWS(parse_formula("and(atom(a))"));
  CHECK_THROWS(parse_formula("atom(a) trailing"));
}

TEST_CASE("structural equality") {
  CHECK(Formula::atom("a") == Formula::atom("a"));
  CHECK(Formula::atom("a") != Formula::atom("b"));
  CHECK(Formula::conj(Formula::atom("a"), Formula::atom("b")) !=
        Formula::conj(Formula::atom("b"), Formula::atom("a")));
  CHECK(Formula::conj(Formula::atom("a"), Formula::atom("b")) !=
        Formula::disj(Formula::atom("a"), Formula::atom("b")));
}

TEST_CASE("atoms in order of first occurrence") {
  auto f = Formula::conj(Formula::atom("b"),
                         Formula::disj(Formula::atom("a"), Formula::negate(Formula::atom("b"))));
  CHECK(f.atoms() == std::vector<std::string>{"b", "a"});
}

TEST_CASE("conj_all folds left") {
  auto f = Formula::conj_all({Formula::atom("a"), Formula::atom("b"), Formula::atom("c")});
  CHECK(f.to_string() == "and(and(atom(a), atom(b)), atom(c))");
  CHECK(Formula::conj_all({Formula::atom("a")}) == Formula::atom("a"));
  CHECK_THROWS(Formula::conj_all({}));
}

TEST_CASE("splitting negated conjuncts") {
  SUBCASE("plain description") {
    auto s = split_negations(Formula::atom("pink"));
    REQUIRE(s.positive);
    CHECK(*s.positive == Formula::atom("pink"));
    CHECK(s.excluded.empty());
  }
  SUBCASE("negation only") {
    auto s = split_negations(Formula::negate(Formula::atom("blue")));
    CHECK_FALSE(s.positive);
    REQUIRE(s.excluded.size() == 1);
    CHECK(s.excluded[0] == Formula::atom("blue"));
  }
  SUBCASE("mixed conjunction") {
    auto s = split_negations(Formula::conj_all(
        {Formula::atom("pink"), Formula::negate(Formula::atom("red")), Formula::atom("light blue")}));
    REQUIRE(s.positive);
    CHECK(*s.positive == Formula::conj(Formula::atom("pink"), Formula::atom("light blue")));
    REQUIRE(s.excluded.size() == 1);
    CHECK(s.excluded[0] == Formula::atom("red"));
  }
  SUBCASE("negation under a disjunction stays positive") {
    auto f = Formula::disj(Formula::negate(Formula::atom("red")), Formula::atom("blue"));
    auto s = split_negations(f);
    REQUIRE(s.positive);
    CHECK(*s.positive == f);
    CHECK(s.excluded.empty());
  }
}
