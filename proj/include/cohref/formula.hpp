#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cohref {

// Description logic over lexicon terms. Immutable value type; subterms
// are shared.
class Formula {
 public:
  enum class Kind { Atom, And, Or, Not };

  static Formula atom(std::string label);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula negate(Formula f);
  // Left-folded conjunction; requires a nonempty list.
  static Formula conj_all(const std::vector<Formula>& fs);

  Kind kind() const { return kind_; }
  bool is_atom() const { return kind_ == Kind::Atom; }
  const std::string& label() const;  // Atom only
  const Formula& left() const;       // And/Or; also the operand of Not
  const Formula& right() const;      // And/Or

  // Every atom label, in left-to-right order of first occurrence.
  std::vector<std::string> atoms() const;
  void collect_atoms(std::set<std::string>& out) const;

  // Round-trips through parse_formula.
  std::string to_string() const;

  bool operator==(const Formula& other) const;
  bool operator!=(const Formula& other) const { return !(*this == other); }

 private:
  Formula(Kind k, std::string label, std::shared_ptr<const Formula> l,
          std::shared_ptr<const Formula> r);

  Kind kind_;
  std::string label_;
  std::shared_ptr<const Formula> left_;
  std::shared_ptr<const Formula> right_;
};

// Inverse of Formula::to_string: atom(label), and(f, g), or(f, g), not(f).
Formula parse_formula(const std::string& text);

// Splits a director description into its positive part and the
// descriptions of excluded alternatives: not(D) conjuncts become
// exclusions, everything else is conjoined into the positive part.
struct SplitDescription {
  std::optional<Formula> positive;
  std::vector<Formula> excluded;
};
SplitDescription split_negations(const Formula& f);

}  // namespace cohref
