#include "cohref/evaluation.hpp"

#include <algorithm>

#include "cohref/errors.hpp"

namespace cohref {

std::size_t Posterior::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumPatches; ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

double Posterior::max() const { return probs[argmax()]; }

bool Posterior::unique_argmax(std::size_t i) const {
  for (std::size_t j = 0; j < kNumPatches; ++j)
    if (j != i && probs[j] >= probs[i]) return false;
  return true;
}

namespace algebra {

PatchDistribution conjoin(const PatchDistribution& a, const PatchDistribution& b) {
  PatchDistribution out{};
  for (std::size_t i = 0; i < kNumPatches; ++i) out[i] = a[i] * b[i];
  return out;
}

PatchDistribution disjoin(const PatchDistribution& a, const PatchDistribution& b) {
  PatchDistribution out{};
  for (std::size_t i = 0; i < kNumPatches; ++i) out[i] = 1.0 - (1.0 - a[i]) * (1.0 - b[i]);
  return out;
}

PatchDistribution complement(const PatchDistribution& a) {
  PatchDistribution out{};
  for (std::size_t i = 0; i < kNumPatches; ++i) out[i] = 1.0 - a[i];
  return out;
}

Posterior normalize(const PatchDistribution& scores, bool fallback_in) {
  double total = 0.0;
  for (double s : scores) total += s;
  if (!(total > 0.0)) {
    Posterior p = Posterior::uniform();
    p.fallback = true;
    return p;
  }
  Posterior p;
  for (std::size_t i = 0; i < kNumPatches; ++i) p.probs[i] = scores[i] / total;
  p.fallback = fallback_in;
  return p;
}

}  // namespace algebra

Posterior Evaluator::eval_atom(std::string_view label, const DisplayContext& ctx) const {
  const ColorTerm& term = semantics_.lexicon().find(label);
  try {
    Posterior p;
    p.probs = semantics_.literal_listener(term, ctx);
    return p;
  } catch (const DegenerateEvidence&) {
    Posterior p = Posterior::uniform();
    p.fallback = true;
    return p;
  }
}

Posterior Evaluator::eval_formula(const Formula& f, const DisplayContext& ctx) const {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return eval_atom(f.label(), ctx);
    case Formula::Kind::And: {
      auto a = eval_formula(f.left(), ctx);
      auto b = eval_formula(f.right(), ctx);
      return algebra::normalize(algebra::conjoin(a.probs, b.probs), a.fallback || b.fallback);
    }
    case Formula::Kind::Or: {
      auto a = eval_formula(f.left(), ctx);
      auto b = eval_formula(f.right(), ctx);
      return algebra::normalize(algebra::disjoin(a.probs, b.probs), a.fallback || b.fallback);
    }
    case Formula::Kind::Not: {
      auto a = eval_formula(f.left(), ctx);
      return algebra::normalize(algebra::complement(a.probs), a.fallback);
    }
  }
  throw Error("unreachable formula kind");
}

Posterior Evaluator::posterior_over_constraints(const std::vector<Formula>& constraints,
                                                const DisplayContext& ctx) const {
  PatchDistribution acc{1.0, 1.0, 1.0};
  bool fallback = false;
  for (const auto& c : constraints) {
    auto p = eval_formula(c, ctx);
    fallback = fallback || p.fallback;
    acc = algebra::conjoin(acc, p.probs);
    // Rescale so long dialogues do not underflow.
    const double peak = std::max({acc[0], acc[1], acc[2]});
    if (peak > 0.0)
      for (auto& v : acc) v /= peak;
  }
  return algebra::normalize(acc, fallback);
}

}  // namespace cohref
