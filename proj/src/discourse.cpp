#include "cohref/discourse.hpp"

#include "cohref/errors.hpp"

namespace cohref {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string move_name(const Move& m) {
  return std::visit(Overloaded{
                        [](const moves::Identify&) { return std::string("Identify"); },
                        [](const moves::Distinguish&) { return std::string("Distinguish"); },
                        [](const moves::AskClarification&) {
                          return std::string("AskClarification");
                        },
                        [](const moves::Confirmation&) { return std::string("Confirmation"); },
                        [](const moves::Rejection&) { return std::string("Rejection"); },
                        [](const moves::Select&) { return std::string("Select"); },
                        [](const moves::None&) { return std::string("None"); },
                    },
                    m);
}

std::string to_string(CoherenceRelation r) {
  switch (r) {
    case CoherenceRelation::Clarification: return "Clarification";
    case CoherenceRelation::Answer: return "Answer";
    case CoherenceRelation::ConfirmationRel: return "Confirmation";
    case CoherenceRelation::RejectionRel: return "Rejection";
    case CoherenceRelation::Parallel: return "Parallel";
    case CoherenceRelation::Background: return "Background";
    case CoherenceRelation::Alternative: return "Alternative";
    case CoherenceRelation::Expansion: return "Expansion";
  }
  return "?";
}

std::string to_string(Speaker s) { return s == Speaker::Director ? "director" : "matcher"; }

DiscourseGraph::DiscourseGraph() {
  nodes_.push_back({0, Speaker::Director, {}, {}});
}

NodeId DiscourseGraph::add_node(Speaker s, std::vector<Move> moves,
                                std::vector<Attachment> attachments) {
  NodeId id = nodes_.size();
  nodes_.push_back({id, s, std::move(moves), std::move(attachments)});
  return id;
}

void DiscourseGraph::add_exclusions(std::vector<Move>& moves,
                                    const std::vector<Formula>& excluded) {
  for (const auto& d : excluded) {
    Referent aux{next_referent_++};
    moves.push_back(moves::Distinguish{kTarget, aux});
    moves.push_back(moves::Identify{aux, d});
  }
}

NodeId DiscourseGraph::attach_director_description(const std::optional<Formula>& positive,
                                                   const std::vector<Formula>& excluded) {
  std::vector<Move> ms;
  if (positive) ms.push_back(moves::Identify{kTarget, *positive});
  add_exclusions(ms, excluded);
  NodeId id = add_node(Speaker::Director, std::move(ms),
                       {{most_recent_director_, CoherenceRelation::Expansion}});
  most_recent_director_ = id;
  return id;
}

NodeId DiscourseGraph::attach_director_formula(const Formula& description) {
  auto split = split_negations(description);
  return attach_director_description(split.positive, split.excluded);
}

NodeId DiscourseGraph::attach_clarification(const Formula& description) {
  NodeId id = add_node(Speaker::Matcher, {moves::AskClarification{kTarget, description}},
                       {{0, CoherenceRelation::Clarification}});
  most_recent_clarification_ = id;
  pending_clarification_ = id;
  return id;
}

NodeId DiscourseGraph::answer_node(std::vector<Move> ms, CoherenceRelation to_question,
                                   CoherenceRelation to_director) {
  if (!pending_clarification_) throw DiscourseError("no pending clarification to answer");
  NodeId id = add_node(Speaker::Director, std::move(ms),
                       {{*pending_clarification_, to_question},
                        {most_recent_director_, to_director}});
  most_recent_director_ = id;
  pending_clarification_.reset();
  return id;
}

NodeId DiscourseGraph::attach_confirmation() {
  return answer_node({moves::Confirmation{kTarget}}, CoherenceRelation::ConfirmationRel,
                     CoherenceRelation::Answer);
}

NodeId DiscourseGraph::attach_rejection(const std::optional<Formula>& replacement,
                                        const std::vector<Formula>& excluded) {
  std::vector<Move> ms{moves::Rejection{kTarget, replacement}};
  if (replacement) ms.push_back(moves::Identify{kTarget, *replacement});
  if (!pending_clarification_) throw DiscourseError("no pending clarification to answer");
  add_exclusions(ms, excluded);
  return answer_node(std::move(ms), CoherenceRelation::RejectionRel, CoherenceRelation::Answer);
}

NodeId DiscourseGraph::attach_answer(const Formula& description) {
  auto split = split_negations(description);
  std::vector<Move> ms;
  if (split.positive) ms.push_back(moves::Identify{kTarget, *split.positive});
  if (!pending_clarification_) throw DiscourseError("no pending clarification to answer");
  add_exclusions(ms, split.excluded);
  return answer_node(std::move(ms), CoherenceRelation::Answer, CoherenceRelation::Expansion);
}

NodeId DiscourseGraph::attach_none() {
  return add_node(Speaker::Director, {moves::None{}},
                  {{most_recent_director_, CoherenceRelation::Background}});
}

NodeId DiscourseGraph::attach_selection(std::size_t patch) {
  selected_ = patch;
  return add_node(Speaker::Matcher, {moves::Select{kTarget}},
                  {{most_recent_director_, CoherenceRelation::Answer}});
}

namespace {

const Formula& clarification_of(const DiscourseGraph& g, const DiscourseNode& answer,
                                CoherenceRelation rel) {
  for (const auto& a : answer.attachments) {
    if (a.relation != rel) continue;
    for (const auto& m : g.node(a.parent).moves) {
      if (auto q = std::get_if<moves::AskClarification>(&m)) return q->description;
    }
  }
  throw DiscourseError("answer node without a clarification parent");
}

}  // namespace

CommitmentSet extract_commitments(const DiscourseGraph& g) {
  CommitmentSet cs;
  for (const auto& node : g.nodes()) {
    if (node.speaker != Speaker::Director) continue;
    for (const auto& m : node.moves) {
      std::visit(Overloaded{
                     [&](const moves::Identify& id) {
                       cs.referents.insert(id.referent);
                       cs.positive.emplace_back(id.referent, id.description);
                     },
                     [&](const moves::Distinguish& d) {
                       cs.referents.insert(d.a);
                       cs.referents.insert(d.b);
                       if (d.a != d.b) cs.inequalities.emplace(d.a, d.b);
                     },
                     [&](const moves::Confirmation& c) {
                       cs.positive.emplace_back(
                           c.referent,
                           clarification_of(g, node, CoherenceRelation::ConfirmationRel));
                     },
                     [&](const moves::Rejection& r) {
                       cs.positive.emplace_back(
                           r.referent, Formula::negate(clarification_of(
                                           g, node, CoherenceRelation::RejectionRel)));
                     },
                     [](const auto&) {},
                 },
                 m);
    }
  }
  return cs;
}

std::vector<Formula> commitments_to_target_constraints(const CommitmentSet& cs) {
  std::vector<Formula> out;
  for (const auto& [ref, f] : cs.positive) {
    if (ref == cs.target) {
      out.push_back(f);
    } else if (cs.inequalities.count({cs.target, ref}) || cs.inequalities.count({ref, cs.target})) {
      out.push_back(Formula::negate(f));
    }
  }
  return out;
}

nlohmann::json formula_to_json(const Formula& f) { return f.to_string(); }

nlohmann::json move_to_json(const Move& m) {
  nlohmann::json j;
  j["type"] = move_name(m);
  std::visit(Overloaded{
                 [&](const moves::Identify& x) {
                   j["referent"] = x.referent.name();
                   j["description"] = formula_to_json(x.description);
                 },
                 [&](const moves::Distinguish& x) {
                   j["referents"] = {x.a.name(), x.b.name()};
                 },
                 [&](const moves::AskClarification& x) {
                   j["referent"] = x.referent.name();
                   j["description"] = formula_to_json(x.description);
                 },
                 [&](const moves::Confirmation& x) { j["referent"] = x.referent.name(); },
                 [&](const moves::Rejection& x) {
                   j["referent"] = x.referent.name();
                   if (x.replacement) j["replacement"] = formula_to_json(*x.replacement);
                 },
                 [&](const moves::Select& x) { j["referent"] = x.referent.name(); },
                 [](const moves::None&) {},
             },
             m);
  return j;
}

nlohmann::json DiscourseGraph::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nlohmann::json jn;
    jn["id"] = n.id;
    jn["speaker"] = to_string(n.speaker);
    jn["moves"] = nlohmann::json::array();
    for (const auto& m : n.moves) jn["moves"].push_back(move_to_json(m));
    jn["attachments"] = nlohmann::json::array();
    for (const auto& a : n.attachments) {
      jn["attachments"].push_back({{"parent", a.parent}, {"relation", to_string(a.relation)}});
    }
    nodes.push_back(std::move(jn));
  }
  nlohmann::json j;
  j["nodes"] = std::move(nodes);
  j["most_recent_director"] = most_recent_director_;
  j["most_recent_clarification"] =
      most_recent_clarification_ ? nlohmann::json(*most_recent_clarification_) : nlohmann::json();
  return j;
}

}  // namespace cohref
