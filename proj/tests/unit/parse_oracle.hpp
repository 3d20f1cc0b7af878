#pragma once

// Top-down enumeration of every derivation of a token string, written
// without reference to the chart parser.

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "cohref/grammar.hpp"

namespace oracle {

struct Derivation {
  std::string bracketed;
  double probability;
};

class Enumerator {
 public:
  Enumerator(const cohref::Pcfg& pcfg, std::vector<std::string> tokens)
      : pcfg_(pcfg), tokens_(std::move(tokens)) {}

  std::vector<Derivation> all() { return derive(pcfg_.grammar().start(), 0, tokens_.size()); }

 private:
  using Key = std::tuple<cohref::SymbolId, std::size_t, std::size_t>;

  const std::vector<Derivation>& derive(cohref::SymbolId sym, std::size_t i, std::size_t j) {
    Key key{sym, i, j};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Derivation> out;
    const auto& g = pcfg_.grammar();
    if (!g.is_nonterminal(sym)) {
      if (j == i + 1 && tokens_[i] == g.name(sym)) out.push_back({g.name(sym), 1.0});
    } else {
      for (cohref::RuleId r : g.rules_for(sym)) {
        const auto& rhs = g.rule(r).rhs;
        if (rhs.size() > j - i) continue;
        expand(r, rhs, 0, i, j, "(" + g.name(sym), pcfg_.weight(r), out);
      }
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

  // Splits [i, j) into one nonempty piece per remaining right-hand symbol.
  void expand(cohref::RuleId r, const std::vector<cohref::SymbolId>& rhs, std::size_t k,
              std::size_t i, std::size_t j, const std::string& prefix, double prob,
              std::vector<Derivation>& out) {
    if (k == rhs.size()) {
      if (i == j) out.push_back({prefix + ")", prob});
      return;
    }
    const std::size_t remaining = rhs.size() - k - 1;
    for (std::size_t m = i + 1; m + remaining <= j; ++m) {
      if (k + 1 == rhs.size() && m != j) continue;
      const auto subs = derive(rhs[k], i, m);  // copy: memo may rehash
      for (const auto& d : subs) {
        expand(r, rhs, k + 1, m, j, prefix + " " + d.bracketed, prob * d.probability, out);
      }
    }
  }

  const cohref::Pcfg& pcfg_;
  std::vector<std::string> tokens_;
  std::map<Key, std::vector<Derivation>> memo_;
};

}  // namespace oracle
