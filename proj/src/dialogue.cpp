#include "cohref/dialogue.hpp"

#include <array>

#include "cohref/errors.hpp"

namespace cohref {

Reading read_utterance(std::string_view utterance, const Pcfg& pcfg, const Lexicon& lexicon) {
  Reading r;
  r.tokens = tokenize(utterance, lexicon);
  if (r.tokens.empty()) return r;
  r.outcome = astar_best_parse(pcfg, r.tokens);
  std::vector<Formula> parts;
  for (const auto& tree : r.outcome.trees()) {
    try {
      parts.push_back(tree_to_formula(tree, lexicon, &r.notes));
    } catch (const InterpretationError& e) {
      r.notes.push_back(e.what());
    }
  }
  if (!parts.empty()) r.formula = Formula::conj_all(parts);
  return r;
}

namespace {

constexpr std::array<std::string_view, 10> kYes{"yes", "yeah", "yep", "yup", "correct",
                                                 "right", "exactly", "sure", "ok", "okay"};
constexpr std::array<std::string_view, 5> kNo{"no", "nope", "nah", "wrong", "incorrect"};

std::string join_tail(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

bool is_yes_word(std::string_view token) {
  for (auto w : kYes)
    if (w == token) return true;
  return false;
}

bool is_no_word(std::string_view token) {
  for (auto w : kNo)
    if (w == token) return true;
  return false;
}

std::string to_string(ReplyKind k) {
  switch (k) {
    case ReplyKind::Clarify: return "clarify";
    case ReplyKind::Select: return "select";
    case ReplyKind::NotUnderstood: return "not_understood";
    case ReplyKind::Timeout: return "timeout";
  }
  return "?";
}

std::string to_string(Uptake u) {
  switch (u) {
    case Uptake::Description: return "description";
    case Uptake::Confirmation: return "confirmation";
    case Uptake::Rejection: return "rejection";
    case Uptake::Answer: return "answer";
    case Uptake::NotUnderstood: return "not_understood";
  }
  return "?";
}

nlohmann::json MatcherReply::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)},
                   {"text", text},
                   {"action", cohref::to_string(action)},
                   {"turn", turn},
                   {"posterior", posterior.probs}};
  if (term) j["term"] = *term;
  if (patch) j["patch"] = *patch;
  return j;
}

Matcher::Matcher(const ColorSemantics& semantics, const Pcfg& pcfg, Policy& policy,
                 const DisplayContext& context)
    : semantics_(semantics),
      pcfg_(pcfg),
      policy_(policy),
      evaluator_(semantics),
      context_(context.without_target()) {}

void Matcher::note_atoms(const Formula& f) {
  for (const auto& a : f.atoms()) used_.insert(a);
}

Uptake Matcher::absorb(std::string_view utterance) {
  if (finished_) throw DiscourseError("the game is already over");
  const Lexicon& lex = semantics_.lexicon();
  Uptake u = Uptake::NotUnderstood;
  const auto tokens = tokenize(utterance, lex);
  if (graph_.clarification_pending() && !tokens.empty() && is_yes_word(tokens.front())) {
    graph_.attach_confirmation();
    u = Uptake::Confirmation;
  } else if (graph_.clarification_pending() && !tokens.empty() && is_no_word(tokens.front())) {
    const Reading rest = read_utterance(join_tail(tokens), pcfg_, lex);
    if (rest.formula) {
      note_atoms(*rest.formula);
      auto split = split_negations(*rest.formula);
      graph_.attach_rejection(split.positive, split.excluded);
    } else {
      graph_.attach_rejection();
    }
    u = Uptake::Rejection;
  } else {
    const Reading r = read_utterance(utterance, pcfg_, lex);
    if (r.formula) {
      note_atoms(*r.formula);
      if (graph_.clarification_pending()) {
        graph_.attach_answer(*r.formula);
        u = Uptake::Answer;
      } else {
        graph_.attach_director_formula(*r.formula);
        u = Uptake::Description;
      }
    } else {
      graph_.attach_none();
    }
  }
  last_uptake_ = u;
  return u;
}

std::vector<Formula> Matcher::constraints() const {
  return commitments_to_target_constraints(extract_commitments(graph_));
}

Posterior Matcher::posterior() const {
  return evaluator_.posterior_over_constraints(constraints(), context_);
}

DialogueState Matcher::state() const { return {posterior().probs, history_}; }

MatcherReply Matcher::select_now() {
  if (finished_) throw DiscourseError("the game is already over");
  MatcherReply r;
  r.turn = history_.size() + 1;
  r.posterior = posterior();
  r.action = Action::Select;
  r.kind = ReplyKind::Select;
  r.patch = r.posterior.argmax();
  r.text = "[SELECT] " + std::to_string(*r.patch);
  history_.push_back(r.action);
  graph_.attach_selection(*r.patch);
  finished_ = true;
  last_uptake_.reset();
  return r;
}

MatcherReply Matcher::respond() {
  if (finished_) throw DiscourseError("the game is already over");
  MatcherReply r;
  r.turn = history_.size() + 1;
  r.posterior = posterior();

  const bool understood = last_uptake_ != Uptake::NotUnderstood;
  r.action = understood ? policy_.decide(DialogueState{r.posterior.probs, history_})
                        : Action::AskClarification;

  std::optional<std::string> term;
  if (r.action == Action::AskClarification && understood && r.turn < kMaxTurns) {
    try {
      term = semantics_.best_identifying_expression(context_, r.posterior.argmax(), used_).label;
    } catch (const ExhaustedLexicon&) {
      // Nothing left to ask about.
      r.action = Action::Select;
    }
  }
  history_.push_back(r.action);

  if (r.action == Action::Select) {
    r.kind = ReplyKind::Select;
    r.patch = r.posterior.argmax();
    r.text = "[SELECT] " + std::to_string(*r.patch);
    graph_.attach_selection(*r.patch);
    finished_ = true;
  } else if (r.turn >= kMaxTurns) {
    r.kind = ReplyKind::Timeout;
    r.text = "I could not tell which one you mean.";
    finished_ = true;
  } else if (!understood) {
    r.kind = ReplyKind::NotUnderstood;
    r.text = "Sorry, I did not understand. Could you describe it another way?";
  } else {
    r.kind = ReplyKind::Clarify;
    r.term = term;
    r.text = *term + "?";
    graph_.attach_clarification(Formula::atom(*term));
    used_.insert(*term);
  }
  last_uptake_.reset();
  return r;
}

}  // namespace cohref
