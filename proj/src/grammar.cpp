#include "cohref/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <tuple>

#include "cohref/errors.hpp"

namespace cohref {

// ---------------------------------------------------------------- Grammar

SymbolId Grammar::intern(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  SymbolId id = names_.size();
  names_.push_back(name);
  nonterminal_.push_back(false);
  by_lhs_.emplace_back();
  ids_.emplace(name, id);
  return id;
}

RuleId Grammar::add_rule(const std::string& lhs, const std::vector<std::string>& rhs) {
  if (rhs.empty()) throw GrammarError("empty right-hand side for " + lhs);
  if (rhs.size() >= 64) throw GrammarError("right-hand side too long for " + lhs);
  SymbolId l = intern(lhs);
  nonterminal_[l] = true;
  Rule r;
  r.lhs = l;
  for (const auto& s : rhs) r.rhs.push_back(intern(s));
  rules_.push_back(std::move(r));
  by_lhs_[l].push_back(rules_.size() - 1);
  if (start_ == kNoId) start_ = l;
  first_ready_ = false;
  return rules_.size() - 1;
}

void Grammar::set_start(const std::string& name) {
  auto s = symbol(name);
  if (!s || !nonterminal_[*s]) throw GrammarError("start symbol '" + name + "' has no rules");
  start_ = *s;
}

std::optional<SymbolId> Grammar::symbol(std::string_view name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<SymbolId> Grammar::terminal(std::string_view token) const {
  auto s = symbol(token);
  if (!s || nonterminal_[*s]) return std::nullopt;
  return s;
}

const std::vector<RuleId>& Grammar::rules_for(SymbolId lhs) const { return by_lhs_.at(lhs); }

std::vector<SymbolId> Grammar::nonterminals() const {
  std::vector<SymbolId> out;
  for (SymbolId s = 0; s < names_.size(); ++s)
    if (nonterminal_[s]) out.push_back(s);
  return out;
}

void Grammar::validate() const {
  if (start_ == kNoId || by_lhs_[start_].empty()) {
    throw GrammarError("grammar has no start rules");
  }
  // Unary cycles would give infinitely many derivations.
  const std::size_t n = names_.size();
  std::vector<std::vector<SymbolId>> unary(n);
  for (const auto& r : rules_) {
    if (r.rhs.size() == 1 && nonterminal_[r.rhs[0]]) unary[r.lhs].push_back(r.rhs[0]);
  }
  std::vector<int> state(n, 0);
  auto dfs = [&](auto& self, SymbolId s) -> void {
    state[s] = 1;
    for (SymbolId t : unary[s]) {
      if (state[t] == 1) throw GrammarError("unary cycle through " + names_[t]);
      if (state[t] == 0) self(self, t);
    }
    state[s] = 2;
  };
  for (SymbolId s = 0; s < n; ++s)
    if (state[s] == 0) dfs(dfs, s);
}

void Grammar::compute_first_sets() const {
  first_.assign(names_.size(), {});
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : rules_) {
      SymbolId head = r.rhs.front();
      auto& dst = first_[r.lhs];
      std::size_t before = dst.size();
      if (nonterminal_[head]) {
        dst.insert(first_[head].begin(), first_[head].end());
      } else {
        dst.insert(head);
      }
      if (dst.size() != before) changed = true;
    }
  }
  first_union_.clear();
  for (SymbolId s = 0; s < names_.size(); ++s)
    if (nonterminal_[s]) first_union_.insert(first_[s].begin(), first_[s].end());
  first_ready_ = true;
}

const std::set<SymbolId>& Grammar::first_set(SymbolId nt) const {
  if (!first_ready_) compute_first_sets();
  return first_.at(nt);
}

const std::set<SymbolId>& Grammar::first_union() const {
  if (!first_ready_) compute_first_sets();
  return first_union_;
}

std::string Grammar::rule_to_string(RuleId id) const {
  const Rule& r = rules_.at(id);
  std::string out = names_[r.lhs] + " ->";
  for (SymbolId s : r.rhs) {
    const auto& n = names_[s];
    if (!nonterminal_[s] && n.find(' ') != std::string::npos) {
      out += " \"" + n + "\"";
    } else {
      out += " " + n;
    }
  }
  return out;
}

// ------------------------------------------------------------------- Pcfg

Pcfg::Pcfg(Grammar grammar) : grammar_(std::move(grammar)) {
  grammar_.validate();
  weights_.assign(grammar_.rules().size(), 0.0);
  for (SymbolId nt : grammar_.nonterminals()) {
    const auto& rs = grammar_.rules_for(nt);
    for (RuleId r : rs) weights_[r] = 1.0 / static_cast<double>(rs.size());
  }
  // Fill the lazy caches now so a shared Pcfg is never written to.
  grammar_.first_union();
}

Pcfg::Pcfg(Grammar grammar, std::vector<double> weights)
    : grammar_(std::move(grammar)), weights_(std::move(weights)) {
  grammar_.validate();
  if (weights_.size() != grammar_.rules().size()) {
    throw GrammarError("weight count does not match rule count");
  }
  check_normalized();
  grammar_.first_union();
}

void Pcfg::check_normalized() const {
  for (SymbolId nt : grammar_.nonterminals()) {
    double total = 0.0;
    for (RuleId r : grammar_.rules_for(nt)) {
      if (!(weights_[r] > 0.0) || weights_[r] > 1.0) {
        throw GrammarError("rule weight out of (0, 1]: " + grammar_.rule_to_string(r));
      }
      total += weights_[r];
    }
    if (std::fabs(total - 1.0) > 1e-9) {
      throw GrammarError("weights for " + grammar_.name(nt) + " sum to " +
                         std::to_string(total));
    }
  }
}

std::string Pcfg::to_text() const {
  std::ostringstream out;
  out.precision(17);
  const Grammar& g = grammar_;
  std::vector<SymbolId> order{g.start()};
  for (SymbolId nt : g.nonterminals())
    if (nt != g.start()) order.push_back(nt);
  for (SymbolId nt : order) {
    for (RuleId r : g.rules_for(nt)) {
      out << g.rule_to_string(r) << " [" << weights_[r] << "]\n";
    }
  }
  return out.str();
}

// ----------------------------------------------------------- grammar text

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Alternative {
  std::vector<std::string> symbols;
  std::optional<double> weight;
};

Alternative parse_alternative(const std::string& text, std::size_t lineno) {
  Alternative alt;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t') {
      ++i;
    } else if (c == '"') {
      std::size_t close = text.find('"', i + 1);
      if (close == std::string::npos) throw FormatError("unterminated quote", lineno);
      alt.symbols.push_back(text.substr(i + 1, close - i - 1));
      i = close + 1;
    } else if (c == '[') {
      std::size_t close = text.find(']', i);
      if (close == std::string::npos) throw FormatError("unterminated weight", lineno);
      try {
        alt.weight = std::stod(text.substr(i + 1, close - i - 1));
      } catch (const std::exception&) {
        throw FormatError("bad weight", lineno);
      }
      i = close + 1;
    } else {
      std::size_t j = i;
      while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '"' &&
             text[j] != '[')
        ++j;
      alt.symbols.push_back(text.substr(i, j - i));
      i = j;
    }
  }
  return alt;
}

}  // namespace

Pcfg parse_grammar(std::string_view text, const Lexicon& lexicon) {
  Grammar g;
  std::vector<std::optional<double>> weights;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool has_s = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto arrow = line.find("->");
    if (arrow == std::string::npos) throw FormatError("missing '->'", lineno);
    std::string lhs = trim(std::string_view(line).substr(0, arrow));
    if (lhs.empty() || lhs.find(' ') != std::string::npos) {
      throw FormatError("bad left-hand side", lineno);
    }
    if (lhs == "S") has_s = true;
    std::string rest = line.substr(arrow + 2);
    std::size_t pos = 0;
    while (true) {
      // '|' never appears inside quotes in practice; split naively.
      std::size_t bar = rest.find('|', pos);
      std::string part = trim(std::string_view(rest).substr(
          pos, bar == std::string::npos ? std::string::npos : bar - pos));
      Alternative alt = parse_alternative(part, lineno);
      if (alt.symbols.empty()) throw FormatError("empty alternative", lineno);
      if (alt.symbols.size() == 1 && alt.symbols[0] == "@lexicon") {
        if (alt.weight) throw FormatError("@lexicon cannot carry a weight", lineno);
        for (const auto& t : lexicon.terms()) {
          g.add_rule(lhs, {t.label});
          weights.push_back(std::nullopt);
        }
      } else {
        g.add_rule(lhs, alt.symbols);
        weights.push_back(alt.weight);
      }
      if (bar == std::string::npos) break;
      pos = bar + 1;
    }
  }
  if (g.rules().empty()) throw FormatError("grammar has no rules");
  if (has_s) g.set_start("S");
  g.validate();

  Pcfg uniform(g);
  std::vector<double> w = uniform.weights();
  for (SymbolId nt : g.nonterminals()) {
    const auto& rs = g.rules_for(nt);
    std::size_t given = 0;
    for (RuleId r : rs) given += weights[r].has_value();
    if (given == 0) continue;
    if (given != rs.size()) {
      throw FormatError("some but not all rules of " + g.name(nt) + " carry weights");
    }
    for (RuleId r : rs) w[r] = *weights[r];
  }
  return Pcfg(std::move(g), std::move(w));
}

Pcfg load_grammar(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grammar file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grammar(buf.str(), lexicon);
}

std::string default_grammar_text() {
  return "S -> CP | NegP\n"
         "CP -> ADJ CLR | CLR\n"
         "ADJ -> grassy | super\n"
         "NegP -> NEG CP | NEG ADJ\n"
         "NEG -> not\n"
         "CLR -> @lexicon\n";
}

Pcfg default_pcfg(const Lexicon& lexicon) {
  return parse_grammar(default_grammar_text(), lexicon);
}

// -------------------------------------------------------------- ParseTree

std::string ParseTree::bracketed() const {
  if (leaf) return symbol;
  std::string out = "(" + symbol;
  for (const auto& c : children) out += " " + c.bracketed();
  return out + ")";
}

bool ParseTree::operator==(const ParseTree& o) const {
  return symbol == o.symbol && leaf == o.leaf && begin == o.begin && end == o.end &&
         rule == o.rule && children == o.children;
}

std::vector<ParseTree> ParseOutcome::trees() const {
  if (auto c = std::get_if<CompleteParse>(&value)) return {c->best};
  if (auto p = std::get_if<PartialParse>(&value)) return p->fragments;
  return {};
}

// -------------------------------------------------------------- tokenizer

std::vector<std::string> tokenize(std::string_view utterance, const Lexicon& lexicon) {
  std::string cleaned;
  cleaned.reserve(utterance.size());
  for (char ch : utterance) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      // "don't" -> "dont"
    } else {
      cleaned.push_back(' ');
    }
  }
  std::vector<std::string> words;
  std::istringstream in(cleaned);
  std::string w;
  while (in >> w) words.push_back(w);

  std::vector<std::string> tokens;
  const std::size_t longest = std::max<std::size_t>(1, lexicon.max_words());
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t taken = 1;
    for (std::size_t len = std::min(longest, words.size() - i); len >= 2; --len) {
      std::string joined = words[i];
      for (std::size_t k = 1; k < len; ++k) joined += " " + words[i + k];
      if (lexicon.contains(joined)) {
        tokens.push_back(joined);
        taken = len;
        break;
      }
    }
    if (taken == 1) tokens.push_back(words[i]);
    i += taken;
  }
  return tokens;
}

// ------------------------------------------------------------------ Earley

namespace {

struct Item {
  RuleId rule;
  std::size_t dot;
  std::size_t origin;
  bool operator==(const Item&) const = default;
};

// Complete items of a chart run over tokens[offset, offset + len).
class Chart {
 public:
  Chart(const Grammar& g, const std::vector<SymbolId>& toks) : g_(g), toks_(toks) {
    const std::size_t n = toks.size();
    items_.resize(n + 1);
    seen_.resize(n + 1);
    for (RuleId r : g.rules_for(g.start())) add(0, {r, 0, 0});
    for (std::size_t k = 0; k <= n; ++k) {
      for (std::size_t idx = 0; idx < items_[k].size(); ++idx) {
        const Item it = items_[k][idx];
        const Rule& rule = g.rule(it.rule);
        if (it.dot == rule.rhs.size()) {
          completed_.insert({rule.lhs, it.origin, k});
          completed_rules_.insert({it.rule, it.origin, k});
          for (std::size_t p = 0; p < items_[it.origin].size(); ++p) {
            const Item& parent = items_[it.origin][p];
            const Rule& pr = g.rule(parent.rule);
            if (parent.dot < pr.rhs.size() && pr.rhs[parent.dot] == rule.lhs) {
              add(k, {parent.rule, parent.dot + 1, parent.origin});
            }
          }
          continue;
        }
        SymbolId next = rule.rhs[it.dot];
        if (g.is_nonterminal(next)) {
          for (RuleId r : g.rules_for(next)) add(k, {r, 0, k});
        } else if (k < n && toks[k] == next) {
          add(k + 1, {it.rule, it.dot + 1, it.origin});
        }
      }
    }
  }

  bool has(SymbolId sym, std::size_t i, std::size_t j) const {
    return completed_.count({sym, i, j}) > 0;
  }
  bool rule_completed(RuleId r, std::size_t i, std::size_t j) const {
    return completed_rules_.count({r, i, j}) > 0;
  }
  std::size_t size() const { return toks_.size(); }
  SymbolId token(std::size_t k) const { return toks_[k]; }

 private:
  void add(std::size_t k, Item it) {
    const std::size_t key = (it.rule * 64 + it.dot) * (toks_.size() + 1) + it.origin;
    if (seen_[k].insert(key).second) items_[k].push_back(it);
  }

  const Grammar& g_;
  const std::vector<SymbolId>& toks_;
  std::vector<std::vector<Item>> items_;
  std::vector<std::set<std::size_t>> seen_;
  std::set<std::tuple<SymbolId, std::size_t, std::size_t>> completed_;
  std::set<std::tuple<RuleId, std::size_t, std::size_t>> completed_rules_;
};

struct ForestChild {
  bool terminal;
  std::size_t index;  // forest node id, or token position
};

struct ForestEdge {
  RuleId rule;
  std::vector<ForestChild> children;
};

struct ForestNode {
  SymbolId symbol;
  std::size_t begin, end;
  std::vector<ForestEdge> edges;
};

// Packed parse forest restricted to constituents reachable from the root.
class Forest {
 public:
  Forest(const Grammar& g, const Chart& chart, std::size_t end) : g_(g), chart_(chart) {
    if (chart.has(g.start(), 0, end)) root_ = build(g.start(), 0, end);
  }

  std::optional<std::size_t> root() const { return root_; }
  const ForestNode& node(std::size_t id) const { return nodes_[id]; }

 private:
  std::size_t build(SymbolId sym, std::size_t i, std::size_t j) {
    auto key = std::make_tuple(sym, i, j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::size_t id = nodes_.size();
    nodes_.push_back({sym, i, j, {}});
    memo_.emplace(key, id);
    std::vector<ForestEdge> edges;
    for (RuleId r : g_.rules_for(sym)) {
      if (!chart_.rule_completed(r, i, j)) continue;
      std::vector<ForestChild> partial;
      match(r, 0, i, j, partial, edges);
    }
    nodes_[id].edges = std::move(edges);
    return id;
  }

  void match(RuleId r, std::size_t m, std::size_t pos, std::size_t j,
             std::vector<ForestChild>& partial, std::vector<ForestEdge>& out) {
    const Rule& rule = g_.rule(r);
    if (m == rule.rhs.size()) {
      if (pos == j) out.push_back({r, partial});
      return;
    }
    const std::size_t remaining = rule.rhs.size() - m;
    if (pos + remaining > j) return;
    SymbolId x = rule.rhs[m];
    if (!g_.is_nonterminal(x)) {
      if (chart_.token(pos) != x) return;
      partial.push_back({true, pos});
      match(r, m + 1, pos + 1, j, partial, out);
      partial.pop_back();
      return;
    }
    for (std::size_t e = pos + 1; e + (remaining - 1) <= j; ++e) {
      if (!chart_.has(x, pos, e)) continue;
      std::size_t child = build(x, pos, e);
      partial.push_back({false, child});
      match(r, m + 1, e, j, partial, out);
      partial.pop_back();
    }
  }

  const Grammar& g_;
  const Chart& chart_;
  std::vector<ForestNode> nodes_;
  std::map<std::tuple<SymbolId, std::size_t, std::size_t>, std::size_t> memo_;
  std::optional<std::size_t> root_;
};

std::vector<SymbolId> to_symbols(const Grammar& g, const std::vector<std::string>& tokens) {
  std::vector<SymbolId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(g.terminal(t).value_or(kNoId));
  return out;
}

ParseTree make_leaf(const std::vector<std::string>& tokens, std::size_t pos,
                    std::size_t offset) {
  ParseTree leaf;
  leaf.symbol = tokens[offset + pos];
  leaf.leaf = true;
  leaf.begin = offset + pos;
  leaf.end = offset + pos + 1;
  return leaf;
}

class TreeEnumerator {
 public:
  TreeEnumerator(const Pcfg& pcfg, const Forest& forest,
                 const std::vector<std::string>& tokens, std::size_t offset,
                 std::size_t max_trees)
      : pcfg_(pcfg), forest_(forest), tokens_(tokens), offset_(offset), max_(max_trees) {}

  const std::vector<ParseTree>& trees(std::size_t id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    const ForestNode& n = forest_.node(id);
    std::vector<ParseTree> out;
    for (const auto& edge : n.edges) {
      std::vector<std::vector<ParseTree>> options;
      for (const auto& c : edge.children) {
        if (c.terminal) {
          options.push_back({make_leaf(tokens_, c.index, offset_)});
        } else {
          options.push_back(trees(c.index));
        }
      }
      std::vector<std::size_t> pick(options.size(), 0);
      bool any = std::all_of(options.begin(), options.end(),
                             [](const auto& o) { return !o.empty(); });
      while (any) {
        ParseTree t;
        t.symbol = pcfg_.grammar().name(n.symbol);
        t.begin = offset_ + n.begin;
        t.end = offset_ + n.end;
        t.rule = edge.rule;
        double p = pcfg_.weight(edge.rule);
        for (std::size_t k = 0; k < options.size(); ++k) {
          t.children.push_back(options[k][pick[k]]);
          p *= options[k][pick[k]].probability;
        }
        t.probability = p;
        out.push_back(std::move(t));
        if (out.size() > max_) throw GrammarError("too many parse trees");
        std::size_t k = 0;
        while (k < pick.size()) {
          if (++pick[k] < options[k].size()) break;
          pick[k] = 0;
          ++k;
        }
        if (k == pick.size()) break;
      }
    }
    return memo_.emplace(id, std::move(out)).first->second;
  }

 private:
  const Pcfg& pcfg_;
  const Forest& forest_;
  const std::vector<std::string>& tokens_;
  std::size_t offset_;
  std::size_t max_;
  std::map<std::size_t, std::vector<ParseTree>> memo_;
};

// Upper bound on the probability of any derivation from each symbol.
std::vector<double> optimistic_heuristic(const Pcfg& pcfg) {
  const Grammar& g = pcfg.grammar();
  std::vector<double> best(g.num_symbols(), 0.0);
  for (SymbolId s = 0; s < g.num_symbols(); ++s)
    if (!g.is_nonterminal(s)) best[s] = 1.0;
  // A best tree never repeats a nonterminal along a path, so |N| + 1
  // rounds reach the fixpoint.
  const std::size_t rounds = g.nonterminals().size() + 1;
  for (std::size_t round = 0; round < rounds; ++round) {
    for (RuleId id = 0; id < g.rules().size(); ++id) {
      const Rule& r = g.rule(id);
      double v = pcfg.weight(id);
      for (SymbolId c : r.rhs) v *= best[c];
      best[r.lhs] = std::max(best[r.lhs], v);
    }
  }
  return best;
}

struct SearchState {
  double g;  // product of rule weights chosen so far
  double f;  // g times heuristic of the open frontier
  std::vector<std::size_t> frontier;  // forest nodes to expand, front first
  std::vector<std::size_t> choices;   // edge index per expansion, preorder
  std::size_t seq;
};

struct SearchOrder {
  bool operator()(const SearchState& a, const SearchState& b) const {
    if (a.f != b.f) return a.f < b.f;
    return a.seq > b.seq;
  }
};

ParseTree rebuild(const Pcfg& pcfg, const Forest& forest,
                  const std::vector<std::string>& tokens, std::size_t offset,
                  std::size_t node, const std::vector<std::size_t>& choices,
                  std::size_t& cursor) {
  const ForestNode& n = forest.node(node);
  const ForestEdge& edge = n.edges[choices[cursor++]];
  ParseTree t;
  t.symbol = pcfg.grammar().name(n.symbol);
  t.begin = offset + n.begin;
  t.end = offset + n.end;
  t.rule = edge.rule;
  double p = pcfg.weight(edge.rule);
  for (const auto& c : edge.children) {
    if (c.terminal) {
      t.children.push_back(make_leaf(tokens, c.index, offset));
    } else {
      t.children.push_back(rebuild(pcfg, forest, tokens, offset, c.index, choices, cursor));
    }
    p *= t.children.back().probability;
  }
  t.probability = p;
  return t;
}

std::optional<ParseTree> astar(const Pcfg& pcfg, const Forest& forest,
                               const std::vector<std::string>& tokens, std::size_t offset) {
  if (!forest.root()) return std::nullopt;
  const auto h = optimistic_heuristic(pcfg);
  std::priority_queue<SearchState, std::vector<SearchState>, SearchOrder> open;
  std::size_t seq = 0;
  const std::size_t root = *forest.root();
  open.push({1.0, h[forest.node(root).symbol], {root}, {}, seq++});
  while (!open.empty()) {
    SearchState s = open.top();
    open.pop();
    if (s.frontier.empty()) {
      std::size_t cursor = 0;
      return rebuild(pcfg, forest, tokens, offset, root, s.choices, cursor);
    }
    const std::size_t head = s.frontier.front();
    const ForestNode& n = forest.node(head);
    for (std::size_t e = 0; e < n.edges.size(); ++e) {
      const ForestEdge& edge = n.edges[e];
      SearchState next;
      next.g = s.g * pcfg.weight(edge.rule);
      for (const auto& c : edge.children)
        if (!c.terminal) next.frontier.push_back(c.index);
      next.frontier.insert(next.frontier.end(), s.frontier.begin() + 1, s.frontier.end());
      next.choices = s.choices;
      next.choices.push_back(e);
      next.f = next.g;
      for (std::size_t open_node : next.frontier) next.f *= h[forest.node(open_node).symbol];
      next.seq = seq++;
      open.push(std::move(next));
    }
  }
  return std::nullopt;
}

std::size_t count_trees(const Forest& forest, std::size_t id,
                        std::map<std::size_t, std::size_t>& memo) {
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  std::size_t total = 0;
  for (const auto& edge : forest.node(id).edges) {
    std::size_t prod = 1;
    for (const auto& c : edge.children)
      if (!c.terminal) prod *= count_trees(forest, c.index, memo);
    total += prod;
  }
  memo[id] = total;
  return total;
}

}  // namespace

std::vector<ParseTree> earley_parse(const Pcfg& pcfg, const std::vector<std::string>& tokens,
                                    std::size_t max_trees) {
  if (tokens.empty()) return {};
  const auto syms = to_symbols(pcfg.grammar(), tokens);
  Chart chart(pcfg.grammar(), syms);
  Forest forest(pcfg.grammar(), chart, syms.size());
  if (!forest.root()) return {};
  TreeEnumerator en(pcfg, forest, tokens, 0, max_trees);
  return en.trees(*forest.root());
}

std::size_t count_parses(const Pcfg& pcfg, const std::vector<std::string>& tokens) {
  if (tokens.empty()) return 0;
  const auto syms = to_symbols(pcfg.grammar(), tokens);
  Chart chart(pcfg.grammar(), syms);
  Forest forest(pcfg.grammar(), chart, syms.size());
  if (!forest.root()) return 0;
  std::map<std::size_t, std::size_t> memo;
  return count_trees(forest, *forest.root(), memo);
}

ParseOutcome astar_best_parse(const Pcfg& pcfg, const std::vector<std::string>& tokens) {
  if (tokens.empty()) return {NoParse{}};
  const auto syms = to_symbols(pcfg.grammar(), tokens);
  Chart chart(pcfg.grammar(), syms);
  Forest forest(pcfg.grammar(), chart, syms.size());
  if (forest.root()) {
    std::map<std::size_t, std::size_t> memo;
    CompleteParse c;
    c.tree_count = count_trees(forest, *forest.root(), memo);
    c.best = *astar(pcfg, forest, tokens, 0);
    return {std::move(c)};
  }
  return partial_parse_recover(pcfg, tokens);
}

ParseOutcome partial_parse_recover(const Pcfg& pcfg, const std::vector<std::string>& tokens) {
  const Grammar& g = pcfg.grammar();
  const auto syms = to_symbols(g, tokens);
  const auto& resumable = g.first_union();
  PartialParse out;
  std::size_t pos = 0;
  while (pos < syms.size()) {
    if (syms[pos] == kNoId || !resumable.count(syms[pos])) {
      ++pos;
      continue;
    }
    std::vector<SymbolId> suffix(syms.begin() + static_cast<std::ptrdiff_t>(pos), syms.end());
    Chart chart(g, suffix);
    std::size_t longest = 0;
    for (std::size_t len = suffix.size(); len >= 1; --len) {
      if (chart.has(g.start(), 0, len)) {
        longest = len;
        break;
      }
    }
    if (longest == 0) {
      ++pos;
      continue;
    }
    Forest forest(g, chart, longest);
    out.fragments.push_back(*astar(pcfg, forest, tokens, pos));
    pos += longest;
  }
  if (out.fragments.empty()) return {NoParse{}};
  return {std::move(out)};
}

// --------------------------------------------------------- interpretation

namespace {

class Interpreter {
 public:
  Interpreter(const Lexicon& lexicon, std::vector<std::string>* notes)
      : lexicon_(lexicon), notes_(notes) {}

  Formula interpret(const ParseTree& t) {
    if (t.leaf) throw InterpretationError("cannot interpret bare token '" + t.symbol + "'");
    if (t.symbol == "CLR") return color(t);
    if (t.symbol == "ADJ") return adjective_as_color(t);

    const auto& kids = t.children;
    if (kids.size() == 2 && !kids[0].leaf && kids[0].symbol == "NEG") {
      return Formula::negate(interpret(kids[1]));
    }
    if (kids.size() == 2 && !kids[0].leaf && kids[0].symbol == "ADJ" &&
        !kids[1].leaf && kids[1].symbol == "CLR") {
      const std::string adj = word(kids[0]);
      const std::string clr = word(kids[1]);
      const std::string compound = adj + " " + clr;
      if (lexicon_.contains(compound)) return Formula::atom(compound);
      if (notes_) notes_->push_back("dropped adjective '" + adj + "'");
      return color(kids[1]);
    }
    if (kids.size() == 1) return interpret(kids[0]);

    std::vector<Formula> parts;
    bool disjunctive = false;
    for (const auto& k : kids) {
      if (k.leaf) {
        if (k.symbol == "or") disjunctive = true;
        continue;
      }
      if (k.symbol == "NEG") continue;
      parts.push_back(interpret(k));
    }
    if (parts.empty()) throw InterpretationError("no content under " + t.symbol);
    Formula acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
      acc = disjunctive ? Formula::disj(acc, parts[i]) : Formula::conj(acc, parts[i]);
    }
    return acc;
  }

 private:
  static std::string word(const ParseTree& preterminal) {
    std::string out;
    for (const auto& c : preterminal.children) {
      if (!c.leaf) throw InterpretationError("expected a token under " + preterminal.symbol);
      if (!out.empty()) out += " ";
      out += c.symbol;
    }
    return out;
  }

  Formula color(const ParseTree& t) {
    const std::string w = word(t);
    if (!lexicon_.contains(w)) throw InterpretationError("unmapped color term '" + w + "'");
    return Formula::atom(w);
  }

  Formula adjective_as_color(const ParseTree& t) {
    const std::string w = word(t);
    if (!lexicon_.contains(w)) {
      throw InterpretationError("adjective '" + w + "' has no color reading");
    }
    return Formula::atom(w);
  }

  const Lexicon& lexicon_;
  std::vector<std::string>* notes_;
};

}  // namespace

Formula tree_to_formula(const ParseTree& tree, const Lexicon& lexicon,
                        std::vector<std::string>* notes) {
  return Interpreter(lexicon, notes).interpret(tree);
}

// --------------------------------------------------------------- induction

namespace {

void count_rules(const ParseTree& t, double w, std::vector<double>& counts) {
  if (t.leaf) return;
  counts[t.rule] += w;
  for (const auto& c : t.children) count_rules(c, w, counts);
}

}  // namespace

InductionReport induce_pcfg_weights(const Grammar& grammar, const Lexicon& lexicon,
                                    const std::vector<CorpusItem>& corpus,
                                    const DescriptionEvaluator& evaluator, double smoothing) {
  if (corpus.empty()) throw ValidationError("induction corpus is empty");
  if (!(smoothing > 0.0)) throw ValidationError("smoothing must be positive");
  Pcfg uniform(grammar);
  InductionReport report;
  report.counts.assign(grammar.rules().size(), 0.0);

  for (const auto& item : corpus) {
    const std::size_t target = item.context.target_index();
    const auto tokens = tokenize(item.utterance, lexicon);
    const auto trees = earley_parse(uniform, tokens);
    if (trees.empty()) {
      ++report.unparsed;
      continue;
    }
    std::vector<double> score;
    std::vector<const ParseTree*> kept;
    for (const auto& t : trees) {
      try {
        const Formula f = tree_to_formula(t, lexicon);
        score.push_back(evaluator(f, item.context)[target]);
        kept.push_back(&t);
      } catch (const InterpretationError&) {
        ++report.uninterpretable_trees;
      }
    }
    if (kept.empty()) {
      ++report.unparsed;
      continue;
    }
    double total = 0.0;
    for (double s : score) total += s;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const double w = total > 0.0 ? score[k] / total : 1.0 / static_cast<double>(kept.size());
      count_rules(*kept[k], w, report.counts);
    }
    ++report.used;
  }

  std::vector<double> weights(grammar.rules().size(), 0.0);
  for (SymbolId nt : grammar.nonterminals()) {
    const auto& rs = grammar.rules_for(nt);
    double denom = 0.0;
    for (RuleId r : rs) denom += report.counts[r] + smoothing;
    for (RuleId r : rs) weights[r] = (report.counts[r] + smoothing) / denom;
  }
  report.pcfg = Pcfg(grammar, std::move(weights));
  return report;
}

}  // namespace cohref
