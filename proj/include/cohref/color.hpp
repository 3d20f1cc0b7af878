#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cohref {

using Rng = std::mt19937_64;

inline constexpr std::size_t kNumPatches = 3;

// Hue in degrees, saturation and lightness in [0, 1].
struct ColorPatch {
  double hue = 0.0;
  double sat = 0.0;
  double light = 0.0;

  ColorPatch() = default;
  ColorPatch(double h, double s, double l);

  bool operator==(const ColorPatch&) const = default;
};

// Smallest angular distance between two hues, in [0, 180].
double hue_distance(double a, double b);

struct DisplayContext {
  std::array<ColorPatch, kNumPatches> patches;
  // Known to the director and the simulator only.
  std::optional<std::size_t> target;

  DisplayContext() = default;
  DisplayContext(std::array<ColorPatch, kNumPatches> p,
                 std::optional<std::size_t> t = std::nullopt);

  // Copy with the target removed, as seen by the matcher.
  DisplayContext without_target() const;
  std::size_t target_index() const;
};

struct ColorTerm {
  std::string label;
  ColorPatch mean;
  double spread_hue = 30.0;
  double spread_sat = 0.3;
  double spread_light = 0.3;
};

// Terms kept sorted by label, so iteration order is lexicographic and
// independent of file order.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<ColorTerm> terms);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<ColorTerm>& terms() const { return terms_; }
  const ColorTerm& at(std::size_t i) const { return terms_.at(i); }

  bool contains(std::string_view label) const;
  std::optional<std::size_t> index_of(std::string_view label) const;
  const ColorTerm& find(std::string_view label) const;  // throws UnknownTerm

  // Longest label length in words; used by the tokenizer.
  std::size_t max_words() const { return max_words_; }

 private:
  std::vector<ColorTerm> terms_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t max_words_ = 0;
};

// One JSON object per line; blank lines ignored.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view text);
std::string lexicon_to_jsonl(const Lexicon& lexicon);

// Pluggable stand-in for a learned model of color term meaning.
class ApplicabilityModel {
 public:
  virtual ~ApplicabilityModel() = default;
  virtual double applicability(const ColorTerm& term,
                               const ColorPatch& patch) const = 0;
};

// exp(-1/2 * sum over channels of (distance / spread)^2), hue wrapped.
class GaussianApplicability final : public ApplicabilityModel {
 public:
  double applicability(const ColorTerm& term,
                       const ColorPatch& patch) const override;
};

using Distribution = std::vector<double>;
using PatchDistribution = std::array<double, kNumPatches>;

inline constexpr double kTruthThreshold = 0.5;

struct SemanticsConfig {
  double rationality = 1.0;  // speaker exponent
  double truth_threshold = kTruthThreshold;
};

// Lexicon plus applicability model; immutable after construction.
class ColorSemantics {
 public:
  ColorSemantics(Lexicon lexicon,
                 std::shared_ptr<const ApplicabilityModel> model =
                     std::make_shared<GaussianApplicability>(),
                 SemanticsConfig config = {});

  const Lexicon& lexicon() const { return lexicon_; }
  const SemanticsConfig& config() const { return config_; }

  double applicability(const ColorTerm& term, const ColorPatch& patch) const;

  // P(x_i | w, C) under a uniform prior. Throws DegenerateEvidence.
  PatchDistribution literal_listener(const ColorTerm& term,
                                     const DisplayContext& ctx) const;

  // P(w | x_target, C), aligned with lexicon().terms().
  Distribution speaker_distribution(const DisplayContext& ctx,
                                    std::size_t target) const;

  // Throws ExhaustedLexicon when every term is in `used`.
  const ColorTerm& best_identifying_expression(
      const DisplayContext& ctx, std::size_t patch,
      const std::set<std::string>& used = {}) const;

  // Samples among terms at or above the truth threshold, weighted by
  // applicability; falls back to the most applicable unused term.
  const ColorTerm& sample_true_description(
      const DisplayContext& ctx, std::size_t target, Rng& rng,
      const std::set<std::string>& used = {}) const;

 private:
  Lexicon lexicon_;
  std::shared_ptr<const ApplicabilityModel> model_;
  SemanticsConfig config_;
};

// Uniform draw in [0, 1) that does not depend on the standard library's
// distribution implementations.
double uniform01(Rng& rng);

}  // namespace cohref
