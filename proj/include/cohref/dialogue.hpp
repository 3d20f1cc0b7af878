#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cohref/color.hpp"
#include "cohref/discourse.hpp"
#include "cohref/evaluation.hpp"
#include "cohref/grammar.hpp"
#include "cohref/policy.hpp"

namespace cohref {

// Parse plus interpretation of one director utterance.
struct Reading {
  std::vector<std::string> tokens;
  ParseOutcome outcome{NoParse{}};
  // Conjunction of the interpretable trees; empty when nothing could be read.
  std::optional<Formula> formula;
  std::vector<std::string> notes;
};

// Tokenize, A* parse with partial-parse recovery, and interpret. Fragments
// that fail interpretation are dropped and noted.
Reading read_utterance(std::string_view utterance, const Pcfg& pcfg, const Lexicon& lexicon);

// Closed word classes checked while a clarification is pending.
bool is_yes_word(std::string_view token);
bool is_no_word(std::string_view token);

enum class ReplyKind { Clarify, Select, NotUnderstood, Timeout };
std::string to_string(ReplyKind k);

struct MatcherReply {
  ReplyKind kind = ReplyKind::NotUnderstood;
  std::string text;
  Action action = Action::AskClarification;
  std::optional<std::string> term;   // Clarify
  std::optional<std::size_t> patch;  // Select
  std::size_t turn = 0;              // 1-based turn this reply closes
  Posterior posterior;               // state the decision was made in

  bool terminal() const { return kind == ReplyKind::Select || kind == ReplyKind::Timeout; }
  nlohmann::json to_json() const;
};

// What the matcher made of an utterance before deciding.
enum class Uptake { Description, Confirmation, Rejection, Answer, NotUnderstood };
std::string to_string(Uptake u);

// The matcher's side of one game: discourse graph, terms already used, the
// action history and the policy that picks the next move. The context it
// holds never contains the target.
class Matcher {
 public:
  Matcher(const ColorSemantics& semantics, const Pcfg& pcfg, Policy& policy,
          const DisplayContext& context);

  // Updates the discourse graph from the utterance without acting.
  Uptake absorb(std::string_view utterance);
  // Decides and realizes the next move from the current state.
  MatcherReply respond();
  // Director asks the matcher to commit now; picks the most likely patch.
  MatcherReply select_now();
  MatcherReply hear(std::string_view utterance) {
    absorb(utterance);
    return respond();
  }

  DialogueState state() const;
  Posterior posterior() const;
  std::vector<Formula> constraints() const;

  const DiscourseGraph& graph() const { return graph_; }
  const std::set<std::string>& used_terms() const { return used_; }
  const DisplayContext& context() const { return context_; }
  std::size_t turn() const { return history_.size(); }
  bool finished() const { return finished_; }
  std::optional<Uptake> last_uptake() const { return last_uptake_; }

 private:
  void note_atoms(const Formula& f);

  const ColorSemantics& semantics_;
  const Pcfg& pcfg_;
  Policy& policy_;
  Evaluator evaluator_;
  DisplayContext context_;
  DiscourseGraph graph_;
  std::set<std::string> used_;
  std::vector<Action> history_;
  std::optional<Uptake> last_uptake_;
  bool finished_ = false;
};

}  // namespace cohref
