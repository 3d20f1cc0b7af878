#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cohref/grammar.hpp"
#include "cohref/simulator.hpp"

namespace cohref {

// RFC 4180 style: comma separated, double quotes with "" escapes, CRLF or LF.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

struct IngestReport {
  std::vector<CorpusItem> items;
  std::vector<std::pair<std::size_t, std::string>> skipped;  // line, reason
  std::vector<std::string> warnings;
};

// Header must name utterance, h0, s0, l0, h1, s1, l1, h2, s2, l2 and
// target_index, in any order. Saturation and lightness above 1 are read as
// percentages. Throws FormatError when columns are missing.
IngestReport ingest_cic_text(std::string_view text);
IngestReport ingest_cic(const std::filesystem::path& path);

std::string corpus_to_csv(const std::vector<CorpusItem>& items);

enum class Coverage { Complete, OneFragment, TwoFragments, ThreeOrMoreFragments, NoParse };
inline constexpr std::size_t kCoverageKinds = 5;
std::string to_string(Coverage c);

Coverage classify_parse(const ParseOutcome& outcome);

struct FirstUtteranceReport {
  std::size_t total = 0;
  std::array<std::size_t, kCoverageKinds> coverage{};
  std::size_t evaluated = 0;  // rows with a complete parse
  std::size_t successes = 0;

  // Empty when no row parsed completely.
  std::optional<double> success_rate() const;
  double coverage_rate(Coverage c) const;
  nlohmann::json to_json() const;
};

// Parses each utterance as a first move and counts it a success when the
// true target is the unique most likely patch.
FirstUtteranceReport first_utterance_eval(const std::vector<CorpusItem>& corpus,
                                          const ColorSemantics& semantics, const Pcfg& pcfg);

// Each row's utterance is the target's most identifying term.
std::vector<CorpusItem> synthetic_corpus(const ColorSemantics& semantics, std::size_t rows,
                                         std::uint64_t seed, ContextMode mode);

}  // namespace cohref
