#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cohref/formula.hpp"

namespace cohref {

// Discourse referent: 0 is the distinguished target T, k >= 1 is A_k.
struct Referent {
  std::size_t id = 0;
  bool is_target() const { return id == 0; }
  std::string name() const { return id == 0 ? "T" : "A" + std::to_string(id); }
  auto operator<=>(const Referent&) const = default;
};

inline constexpr Referent kTarget{0};

namespace moves {
struct Identify {
  Referent referent;
  Formula description;
};
struct Distinguish {
  Referent a;
  Referent b;
};
struct AskClarification {
  Referent referent;
  Formula description;
};
struct Confirmation {
  Referent referent;
};
// The replacement description, when present, is also recorded as a
// separate Identify move on the same node.
struct Rejection {
  Referent referent;
  std::optional<Formula> replacement;
};
struct Select {
  Referent referent;
};
struct None {};
}  // namespace moves

using Move = std::variant<moves::Identify, moves::Distinguish, moves::AskClarification,
                          moves::Confirmation, moves::Rejection, moves::Select, moves::None>;

std::string move_name(const Move& m);

enum class Speaker { Director, Matcher };

enum class CoherenceRelation {
  Clarification,
  Answer,
  ConfirmationRel,
  RejectionRel,
  Parallel,
  Background,
  Alternative,
  Expansion,
};

std::string to_string(CoherenceRelation r);
std::string to_string(Speaker s);

using NodeId = std::size_t;

struct Attachment {
  NodeId parent;
  CoherenceRelation relation;
};

struct DiscourseNode {
  NodeId id = 0;
  Speaker speaker = Speaker::Director;
  std::vector<Move> moves;
  std::vector<Attachment> attachments;
};

struct CommitmentSet {
  std::set<Referent> referents{kTarget};
  // Descriptive constraints in commitment order. Named "positive" after
  // the director's commitments; an entry may itself be a negation.
  std::vector<std::pair<Referent, Formula>> positive;
  std::set<std::pair<Referent, Referent>> inequalities;
  Referent target = kTarget;
};

// Coherence graph for one dialogue. Node 0 introduces T.
class DiscourseGraph {
 public:
  DiscourseGraph();

  // Identify(T, positive) when given, plus Distinguish(T, A_k) and
  // Identify(A_k, D_k) for each excluded description. Attaches to the most
  // recent director node by Expansion.
  NodeId attach_director_description(const std::optional<Formula>& positive,
                                     const std::vector<Formula>& excluded = {});
  // Convenience: splits top-level negated conjuncts into exclusions.
  NodeId attach_director_formula(const Formula& description);

  // Matcher question about T; attaches to node 0.
  NodeId attach_clarification(const Formula& description);

  // Attach to the pending clarification and to the most recent director
  // node. Throw DiscourseError when no clarification is pending.
  NodeId attach_confirmation();
  NodeId attach_rejection(const std::optional<Formula>& replacement = std::nullopt,
                          const std::vector<Formula>& excluded = {});
  // A director reply to a clarification that neither confirms nor rejects
  // it but answers it with a description (e.g. picking one disjunct).
  NodeId attach_answer(const Formula& description);

  // Director contribution the matcher could not interpret.
  NodeId attach_none();

  NodeId attach_selection(std::size_t patch);

  const std::vector<DiscourseNode>& nodes() const { return nodes_; }
  const DiscourseNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  NodeId most_recent_director() const { return most_recent_director_; }
  std::optional<NodeId> most_recent_clarification() const { return most_recent_clarification_; }
  bool clarification_pending() const { return pending_clarification_.has_value(); }
  std::optional<std::size_t> selected_patch() const { return selected_; }
  std::size_t referent_count() const { return next_referent_; }

  nlohmann::json to_json() const;

 private:
  NodeId add_node(Speaker s, std::vector<Move> moves, std::vector<Attachment> attachments);
  void add_exclusions(std::vector<Move>& moves, const std::vector<Formula>& excluded);
  NodeId answer_node(std::vector<Move> moves, CoherenceRelation to_question,
                     CoherenceRelation to_director);

  std::vector<DiscourseNode> nodes_;
  NodeId most_recent_director_ = 0;
  std::optional<NodeId> most_recent_clarification_;
  std::optional<NodeId> pending_clarification_;
  std::optional<std::size_t> selected_;
  std::size_t next_referent_ = 1;
};

// Director commitments by in-order traversal: Identify moves on any
// referent; a clarification's description enters on T when confirmed and
// negated when rejected; unanswered clarifications contribute nothing.
CommitmentSet extract_commitments(const DiscourseGraph& g);

// Ordered constraints on T; Distinguish(T, A) with Identify(A, D)
// contributes not(D).
std::vector<Formula> commitments_to_target_constraints(const CommitmentSet& cs);

nlohmann::json formula_to_json(const Formula& f);
nlohmann::json move_to_json(const Move& m);

}  // namespace cohref
