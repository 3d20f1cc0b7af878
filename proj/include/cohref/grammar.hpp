#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cohref/color.hpp"
#include "cohref/formula.hpp"

namespace cohref {

using SymbolId = std::size_t;
using RuleId = std::size_t;
inline constexpr std::size_t kNoId = std::numeric_limits<std::size_t>::max();

struct Rule {
  SymbolId lhs = kNoId;
  std::vector<SymbolId> rhs;
};

// Context-free grammar without epsilon rules or unary cycles. Nonterminals
// are exactly the symbols that appear on some left-hand side.
class Grammar {
 public:
  Grammar() = default;

  // Adds a production, declaring symbols on first use. Terminals are
  // literal tokens (possibly multiword, e.g. "dark blue").
  RuleId add_rule(const std::string& lhs, const std::vector<std::string>& rhs);
  void set_start(const std::string& name);

  // Checks the structural invariants; throws GrammarError.
  void validate() const;

  SymbolId start() const { return start_; }
  std::size_t num_symbols() const { return names_.size(); }
  const std::string& name(SymbolId s) const { return names_.at(s); }
  bool is_nonterminal(SymbolId s) const { return nonterminal_.at(s); }
  std::optional<SymbolId> symbol(std::string_view name) const;
  // Terminal symbol matching a token, if any.
  std::optional<SymbolId> terminal(std::string_view token) const;

  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(RuleId r) const { return rules_.at(r); }
  const std::vector<RuleId>& rules_for(SymbolId lhs) const;
  std::vector<SymbolId> nonterminals() const;

  // Terminals that can begin a derivation from `nt`.
  const std::set<SymbolId>& first_set(SymbolId nt) const;
  // Union of every nonterminal's first set.
  const std::set<SymbolId>& first_union() const;

  std::string rule_to_string(RuleId r) const;

 private:
  SymbolId intern(const std::string& name);
  void compute_first_sets() const;

  std::vector<std::string> names_;
  std::vector<bool> nonterminal_;
  std::map<std::string, SymbolId, std::less<>> ids_;
  std::vector<Rule> rules_;
  std::vector<std::vector<RuleId>> by_lhs_;
  SymbolId start_ = kNoId;

  mutable bool first_ready_ = false;
  mutable std::vector<std::set<SymbolId>> first_;
  mutable std::set<SymbolId> first_union_;
};

// Grammar plus per-rule probabilities normalized per left-hand side.
class Pcfg {
 public:
  Pcfg() = default;
  // Uniform weights per nonterminal.
  explicit Pcfg(Grammar grammar);
  Pcfg(Grammar grammar, std::vector<double> weights);

  const Grammar& grammar() const { return grammar_; }
  double weight(RuleId r) const { return weights_.at(r); }
  const std::vector<double>& weights() const { return weights_; }

  // Weighted grammar text, loadable by parse_grammar.
  std::string to_text() const;

 private:
  void check_normalized() const;

  Grammar grammar_;
  std::vector<double> weights_;
};

// "LHS -> A B [0.3] | C" per line; "@lexicon" expands to every lexicon
// label; double quotes delimit multiword terminals; '#' starts a comment.
// Weights are optional but, when present, required on every alternative of
// that nonterminal. The first left-hand side is the start symbol unless an
// "S" rule exists.
Pcfg parse_grammar(std::string_view text, const Lexicon& lexicon);
Pcfg load_grammar(const std::filesystem::path& path, const Lexicon& lexicon);

// The six-category excerpt used by the interpreter (S, CP, NegP, ADJ, NEG,
// CLR) with uniform weights.
Pcfg default_pcfg(const Lexicon& lexicon);
std::string default_grammar_text();

struct ParseTree {
  std::string symbol;  // nonterminal name, or token text at a leaf
  bool leaf = false;
  std::size_t begin = 0;
  std::size_t end = 0;
  RuleId rule = kNoId;
  double probability = 1.0;
  std::vector<ParseTree> children;

  // "(S (CP (CLR green)))"
  std::string bracketed() const;
  bool operator==(const ParseTree& o) const;
};

struct CompleteParse {
  ParseTree best;
  std::size_t tree_count = 0;
};

// Non-overlapping partial parses, ordered by span.
struct PartialParse {
  std::vector<ParseTree> fragments;
};

struct NoParse {};

struct ParseOutcome {
  std::variant<CompleteParse, PartialParse, NoParse> value;

  bool complete() const { return std::holds_alternative<CompleteParse>(value); }
  bool partial() const { return std::holds_alternative<PartialParse>(value); }
  bool none() const { return std::holds_alternative<NoParse>(value); }
  // Complete: one tree. Partial: every fragment. None: empty.
  std::vector<ParseTree> trees() const;
};

// Lowercases, strips punctuation, splits on whitespace, then merges the
// longest multiword lexicon labels into single tokens.
std::vector<std::string> tokenize(std::string_view utterance, const Lexicon& lexicon);

// Every complete derivation of `tokens` from the start symbol. Throws
// GrammarError if there are more than `max_trees` of them.
std::vector<ParseTree> earley_parse(const Pcfg& pcfg,
                                    const std::vector<std::string>& tokens,
                                    std::size_t max_trees = 100000);

// Number of derivations without materializing them.
std::size_t count_parses(const Pcfg& pcfg, const std::vector<std::string>& tokens);

// Most probable complete tree by A* over the parse forest, with an
// optimistic per-symbol heuristic. Falls back to partial_parse_recover.
ParseOutcome astar_best_parse(const Pcfg& pcfg, const std::vector<std::string>& tokens);

// Greedy left-to-right recovery of maximal sub-parses from the start
// symbol, resuming at tokens in the grammar's first sets.
ParseOutcome partial_parse_recover(const Pcfg& pcfg,
                                   const std::vector<std::string>& tokens);

// Compositional interpretation of a tree. Recognizes CLR, ADJ and NEG by
// name; NEG X negates X, ADJ CLR yields the compound label when the lexicon
// has it and the bare color otherwise. Unrecognized adjectives are recorded
// in `notes` when given. Throws InterpretationError.
Formula tree_to_formula(const ParseTree& tree, const Lexicon& lexicon,
                        std::vector<std::string>* notes = nullptr);

struct CorpusItem {
  std::string utterance;
  DisplayContext context;  // target required
};

// Maps a parsed description to the posterior its commitments induce.
using DescriptionEvaluator =
    std::function<PatchDistribution(const Formula&, const DisplayContext&)>;

struct InductionReport {
  Pcfg pcfg;
  std::vector<double> counts;  // weighted rule usage before smoothing
  std::size_t used = 0;        // utterances with at least one tree
  std::size_t unparsed = 0;
  std::size_t uninterpretable_trees = 0;
};

inline constexpr double kInductionSmoothing = 0.1;

// Weighted rule counts where each utterance's trees share one unit of
// count in proportion to the posterior they give the true target; add-lambda
// smoothing, normalized per nonterminal.
InductionReport induce_pcfg_weights(const Grammar& grammar, const Lexicon& lexicon,
                                    const std::vector<CorpusItem>& corpus,
                                    const DescriptionEvaluator& evaluator,
                                    double smoothing = kInductionSmoothing);

}  // namespace cohref
