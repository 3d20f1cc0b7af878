#include "cohref/color.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cohref/errors.hpp"

namespace cohref {

namespace {

double wrap_hue(double h) {
  if (!std::isfinite(h)) return 0.0;
  double w = std::fmod(h, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

double clamp01(double v) {
  if (!std::isfinite(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

std::size_t word_count(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::string w;
  std::size_t n = 0;
  while (in >> w) ++n;
  return n;
}

}  // namespace

ColorPatch::ColorPatch(double h, double s, double l)
    : hue(wrap_hue(h)), sat(clamp01(s)), light(clamp01(l)) {}

double hue_distance(double a, double b) {
  double d = std::fabs(wrap_hue(a) - wrap_hue(b));
  return d > 180.0 ? 360.0 - d : d;
}

DisplayContext::DisplayContext(std::array<ColorPatch, kNumPatches> p,
                               std::optional<std::size_t> t)
    : patches(p), target(t) {
  if (target && *target >= kNumPatches) {
    throw ValidationError("target index out of range: " +
                          std::to_string(*target));
  }
}

DisplayContext DisplayContext::without_target() const {
  return DisplayContext(patches, std::nullopt);
}

std::size_t DisplayContext::target_index() const {
  if (!target) throw ValidationError("display context has no target");
  return *target;
}

Lexicon::Lexicon(std::vector<ColorTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw LexiconError("lexicon is empty");
  std::sort(terms_.begin(), terms_.end(),
            [](const ColorTerm& a, const ColorTerm& b) { return a.label < b.label; });
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (t.label.empty()) throw LexiconError("empty term label");
    if (!(t.spread_hue > 0.0) || !(t.spread_sat > 0.0) || !(t.spread_light > 0.0)) {
      throw LexiconError("non-positive spread for term '" + t.label + "'");
    }
    if (!index_.emplace(t.label, i).second) {
      throw LexiconError("duplicate label '" + t.label + "'");
    }
    max_words_ = std::max(max_words_, word_count(t.label));
  }
}

bool Lexicon::contains(std::string_view label) const {
  return index_.find(label) != index_.end();
}

std::optional<std::size_t> Lexicon::index_of(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const ColorTerm& Lexicon::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw UnknownTerm("unknown color term '" + std::string(label) + "'");
  return terms_[it->second];
}

Lexicon parse_lexicon(std::string_view text) {
  std::vector<ColorTerm> terms;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    ColorTerm t;
    try {
      std::string label = j.at("label").get<std::string>();
      std::transform(label.begin(), label.end(), label.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      t.label = label;
      t.mean = ColorPatch(j.at("hue").get<double>(), j.at("sat").get<double>(),
                          j.at("light").get<double>());
      t.spread_hue = j.at("spread_hue").get<double>();
      t.spread_sat = j.at("spread_sat").get<double>();
      t.spread_light = j.at("spread_light").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad lexicon entry: ") + e.what(), lineno);
    }
    if (!seen.insert(t.label).second) {
      throw LexiconError("duplicate label '" + t.label + "' (line " +
                         std::to_string(lineno) + ")");
    }
    if (!(t.spread_hue > 0.0) || !(t.spread_sat > 0.0) || !(t.spread_light > 0.0)) {
      throw LexiconError("non-positive spread for '" + t.label + "' (line " +
                         std::to_string(lineno) + ")");
    }
    terms.push_back(std::move(t));
  }
  return Lexicon(std::move(terms));
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

std::string lexicon_to_jsonl(const Lexicon& lexicon) {
  std::string out;
  for (const auto& t : lexicon.terms()) {
    nlohmann::json j = {{"label", t.label},           {"hue", t.mean.hue},
                        {"sat", t.mean.sat},          {"light", t.mean.light},
                        {"spread_hue", t.spread_hue}, {"spread_sat", t.spread_sat},
                        {"spread_light", t.spread_light}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

double GaussianApplicability::applicability(const ColorTerm& term,
                                            const ColorPatch& patch) const {
  const double dh = hue_distance(term.mean.hue, patch.hue) / term.spread_hue;
  const double ds = (term.mean.sat - patch.sat) / term.spread_sat;
  const double dl = (term.mean.light - patch.light) / term.spread_light;
  return std::exp(-0.5 * (dh * dh + ds * ds + dl * dl));
}

ColorSemantics::ColorSemantics(Lexicon lexicon,
                               std::shared_ptr<const ApplicabilityModel> model,
                               SemanticsConfig config)
    : lexicon_(std::move(lexicon)), model_(std::move(model)), config_(config) {
  if (lexicon_.empty()) throw LexiconError("lexicon is empty");
  if (!model_) throw Error("applicability model is null");
}

double ColorSemantics::applicability(const ColorTerm& term,
                                     const ColorPatch& patch) const {
  return model_->applicability(term, patch);
}

PatchDistribution ColorSemantics::literal_listener(const ColorTerm& term,
                                                   const DisplayContext& ctx) const {
  PatchDistribution p{};
  double total = 0.0;
  for (std::size_t i = 0; i < kNumPatches; ++i) {
    p[i] = applicability(term, ctx.patches[i]);
    total += p[i];
  }
  if (!(total > 0.0)) {
    throw DegenerateEvidence("term '" + term.label + "' applies to no patch");
  }
  for (auto& v : p) v /= total;
  return p;
}

Distribution ColorSemantics::speaker_distribution(const DisplayContext& ctx,
                                                  std::size_t target) const {
  if (target >= kNumPatches) throw ValidationError("target index out of range");
  const auto& terms = lexicon_.terms();
  Distribution d(terms.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    double mass = 0.0;
    try {
      mass = literal_listener(terms[k], ctx)[target];
    } catch (const DegenerateEvidence&) {
      continue;
    }
    if (!(mass > 0.0)) continue;
    d[k] = std::pow(mass, config_.rationality);
    total += d[k];
  }
  if (!(total > 0.0)) {
    throw DegenerateEvidence("no lexicon term gives the target nonzero mass");
  }
  for (auto& v : d) v /= total;
  return d;
}

const ColorTerm& ColorSemantics::best_identifying_expression(
    const DisplayContext& ctx, std::size_t patch,
    const std::set<std::string>& used) const {
  const auto& terms = lexicon_.terms();
  Distribution d;
  try {
    d = speaker_distribution(ctx, patch);
  } catch (const DegenerateEvidence&) {
    d.assign(terms.size(), 0.0);
  }
  std::optional<std::size_t> best;
  // Terms are in label order, so strict > keeps the lexicographically first.
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (used.count(terms[k].label)) continue;
    if (!best || d[k] > d[*best]) best = k;
  }
  if (!best) throw ExhaustedLexicon("every lexicon term has been used");
  return terms[*best];
}

const ColorTerm& ColorSemantics::sample_true_description(
    const DisplayContext& ctx, std::size_t target, Rng& rng,
    const std::set<std::string>& used) const {
  if (target >= kNumPatches) throw ValidationError("target index out of range");
  const auto& terms = lexicon_.terms();
  std::vector<double> weight(terms.size(), 0.0);
  double total = 0.0;
  std::optional<std::size_t> fallback;
  double fallback_app = -1.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (used.count(terms[k].label)) continue;
    const double a = applicability(terms[k], ctx.patches[target]);
    if (a > fallback_app) {
      fallback_app = a;
      fallback = k;
    }
    if (a >= config_.truth_threshold) {
      weight[k] = a;
      total += a;
    }
  }
  // Draw unconditionally so the stream advances the same way either way.
  const double u = uniform01(rng);
  if (!fallback) throw ExhaustedLexicon("every lexicon term has been used");
  if (!(total > 0.0)) return terms[*fallback];
  double acc = 0.0;
  std::size_t last = *fallback;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (weight[k] <= 0.0) continue;
    last = k;
    acc += weight[k] / total;
    if (u < acc) return terms[k];
  }
  return terms[last];
}

double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cohref
