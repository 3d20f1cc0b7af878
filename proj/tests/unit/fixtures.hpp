#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cohref/color.hpp"

namespace fixtures {

inline cohref::ColorTerm term(std::string label, double h, double s, double l, double sh = 20.0,
                              double ss = 0.3, double sl = 0.2) {
  return {std::move(label), cohref::ColorPatch(h, s, l), sh, ss, sl};
}

// Three well separated hues, handy for hand computation.
inline cohref::Lexicon rgb_lexicon() {
  return cohref::Lexicon({term("red", 0, 0.8, 0.5), term("green", 120, 0.8, 0.5),
                          term("blue", 240, 0.8, 0.5)});
}

inline cohref::DisplayContext rgb_context(std::size_t target = 0) {
  return cohref::DisplayContext({cohref::ColorPatch(0, 0.8, 0.5), cohref::ColorPatch(120, 0.8, 0.5),
                                 cohref::ColorPatch(240, 0.8, 0.5)},
                                target);
}

// Independent reimplementation of the Gaussian kernel.
inline double kernel(const cohref::ColorTerm& t, const cohref::ColorPatch& p) {
  double dh = std::fabs(t.mean.hue - p.hue);
  if (dh > 180.0) dh = 360.0 - dh;
  const double a = dh / t.spread_hue;
  const double b = (t.mean.sat - p.sat) / t.spread_sat;
  const double c = (t.mean.light - p.light) / t.spread_light;
  return std::exp(-0.5 * (a * a + b * b + c * c));
}

inline cohref::Lexicon default_lexicon() {
  return cohref::load_lexicon(std::string(COHREF_TEST_DATA) + "/lexicon.jsonl");
}

}  // namespace fixtures
