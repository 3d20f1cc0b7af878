#include <doctest.h>

#include "cohref/discourse.hpp"
#include "cohref/errors.hpp"

using namespace cohref;

namespace {

bool has_attachment(const DiscourseNode& n, NodeId parent, CoherenceRelation rel) {
  for (const auto& a : n.attachments)
    if (a.parent == parent && a.relation == rel) return true;
  return false;
}

}  // namespace

TEST_CASE("graph starts with the target node") {
  DiscourseGraph g;
  CHECK(g.size() == 1);
  CHECK(g.most_recent_director() == 0);
  CHECK_FALSE(g.clarification_pending());
  auto cs = extract_commitments(g);
  CHECK(cs.referents == std::set<Referent>{kTarget});
  CHECK(commitments_to_target_constraints(cs).empty());
}

TEST_CASE("pink, hot pink?, yes") {
  DiscourseGraph g;
  const NodeId d1 = g.attach_director_formula(Formula::atom("pink"));
  const NodeId q = g.attach_clarification(Formula::atom("hot pink"));
  CHECK(g.clarification_pending());
  CHECK(has_attachment(g.node(q), 0, CoherenceRelation::Clarification));
  CHECK(g.node(q).speaker == Speaker::Matcher);

  const NodeId a = g.attach_confirmation();
  const auto& ans = g.node(a);
  CHECK(ans.attachments.size() == 2);
  CHECK(has_attachment(ans, q, CoherenceRelation::ConfirmationRel));
  CHECK(has_attachment(ans, d1, CoherenceRelation::Answer));
  CHECK_FALSE(g.clarification_pending());
  CHECK(g.most_recent_director() == a);
  CHECK(g.most_recent_clarification() == q);

  auto constraints = commitments_to_target_constraints(extract_commitments(g));
  REQUIRE(constraints.size() == 2);
  CHECK(constraints[0] == Formula::atom("pink"));
  CHECK(constraints[1] == Formula::atom("hot pink"));
}

TEST_CASE("rejection negates the question and adds the replacement") {
  DiscourseGraph g;
  g.attach_director_formula(Formula::atom("blue"));
  const NodeId q = g.attach_clarification(Formula::atom("light blue"));
  const NodeId a = g.attach_rejection(Formula::atom("navy"));
  CHECK(has_attachment(g.node(a), q, CoherenceRelation::RejectionRel));
  auto constraints = commitments_to_target_constraints(extract_commitments(g));
  REQUIRE(constraints.size() == 3);
  CHECK(constraints[0] == Formula::atom("blue"));
  CHECK(constraints[1] == Formula::negate(Formula::atom("light blue")));
  CHECK(constraints[2] == Formula::atom("navy"));
}

TEST_CASE("excluded descriptions become fresh distinct referents") {
  DiscourseGraph g;
  g.attach_director_formula(Formula::conj_all(
      {Formula::atom("green"), Formula::negate(Formula::atom("olive")), Formula::negate(Formula::atom("teal"))}));
  CHECK(g.referent_count() == 3);
  auto cs = extract_commitments(g);
  CHECK(cs.referents.size() == 3);
  CHECK(cs.inequalities.size() == 2);
  CHECK(cs.inequalities.count({kTarget, Referent{1}}));
  auto constraints = commitments_to_target_constraints(cs);
  REQUIRE(constraints.size() == 3);
  CHECK(constraints[0] == Formula::atom("green"));
  CHECK(constraints[1] == Formula::negate(Formula::atom("olive")));
  CHECK(constraints[2] == Formula::negate(Formula::atom("teal")));
}

TEST_CASE("unanswered clarifications commit nothing") {
  DiscourseGraph g;
  g.attach_director_formula(Formula::atom("red"));
  g.attach_clarification(Formula::atom("maroon"));
  CHECK(commitments_to_target_constraints(extract_commitments(g)).size() == 1);
}

TEST_CASE("answers need a pending question") {
  DiscourseGraph g;
  CHECK_THROWS_AS(g.attach_confirmation(), DiscourseError);
  CHECK_THROWS_AS(g.attach_rejection(), DiscourseError);
  CHECK_THROWS_AS(g.attach_answer(Formula::atom("red")), DiscourseError);
  g.attach_clarification(Formula::atom("red"));
  g.attach_confirmation();
  CHECK_THROWS_AS(g.attach_confirmation(), DiscourseError);
}

TEST_CASE("a descriptive answer attaches to the question") {
  DiscourseGraph g;
  g.attach_director_formula(Formula::disj(Formula::atom("red"), Formula::atom("pink")));
  const NodeId q = g.attach_clarification(Formula::atom("red"));
  const NodeId a = g.attach_answer(Formula::atom("pink"));
  CHECK(has_attachment(g.node(a), q, CoherenceRelation::Answer));
  auto constraints = commitments_to_target_constraints(extract_commitments(g));
  CHECK(constraints.back() == Formula::atom("pink"));
}

TEST_CASE("uninterpreted turns and selection") {
  DiscourseGraph g;
  const NodeId d = g.attach_director_formula(Formula::atom("red"));
  const NodeId n = g.attach_none();
  CHECK(has_attachment(g.node(n), d, CoherenceRelation::Background));
  CHECK(g.most_recent_director() == d);
  g.attach_selection(2);
  CHECK(g.selected_patch() == 2u);
  auto j = g.to_json();
  CHECK(j["nodes"].size() == 4);
  CHECK(j["nodes"][1]["moves"][0]["type"] == "Identify");
  CHECK(j["nodes"][1]["moves"][0]["description"] == "atom(red)");
  CHECK(j["nodes"][3]["speaker"] == "matcher");
}
