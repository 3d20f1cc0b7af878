#pragma once

#include <string_view>
#include <vector>

#include "cohref/color.hpp"
#include "cohref/formula.hpp"

namespace cohref {

// Distribution over the three candidate patches, in display order.
struct Posterior {
  PatchDistribution probs{1.0 / 3, 1.0 / 3, 1.0 / 3};
  // Set when some step had zero total mass and fell back to uniform.
  bool fallback = false;

  static Posterior uniform() { return {}; }
  std::size_t argmax() const;  // lowest index on ties
  double max() const;
  bool unique_argmax(std::size_t i) const;
};

// Unnormalized per-patch compositions. Inputs and outputs are scores, not
// necessarily distributions.
namespace algebra {
PatchDistribution conjoin(const PatchDistribution& a, const PatchDistribution& b);
PatchDistribution disjoin(const PatchDistribution& a, const PatchDistribution& b);
PatchDistribution complement(const PatchDistribution& a);
// Divides by the total; uniform with fallback set when the total is zero.
Posterior normalize(const PatchDistribution& scores, bool fallback_in = false);
}  // namespace algebra

class Evaluator {
 public:
  explicit Evaluator(const ColorSemantics& semantics) : semantics_(semantics) {}

  const ColorSemantics& semantics() const { return semantics_; }

  // Literal listener for the term; uniform with fallback on degenerate
  // evidence. Throws UnknownTerm.
  Posterior eval_atom(std::string_view label, const DisplayContext& ctx) const;

  // And: product; Or: 1 - (1 - p)(1 - q); Not: 1 - p. Renormalized after
  // every step.
  Posterior eval_formula(const Formula& f, const DisplayContext& ctx) const;

  // Independent-evidence product over constraints, renormalized; uniform
  // for an empty list.
  Posterior posterior_over_constraints(const std::vector<Formula>& constraints,
                                       const DisplayContext& ctx) const;

 private:
  const ColorSemantics& semantics_;
};

}  // namespace cohref
