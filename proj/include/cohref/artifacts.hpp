#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cohref/color.hpp"
#include "cohref/grammar.hpp"

namespace cohref {

inline constexpr const char* kDataDirEnv = "COHREF_DATA";

// Explicit path, else $COHREF_DATA, else ./data.
std::filesystem::path resolve_data_dir(const std::optional<std::string>& explicit_dir);

// Lexicon and grammar shared read-only by every game.
struct Artifacts {
  ColorSemantics semantics;
  Pcfg pcfg;
};

// The grammar file is optional; without it the built-in color grammar is
// used. Throws on unreadable or malformed files.
std::unique_ptr<Artifacts> load_artifacts(const std::filesystem::path& lexicon,
                                          const std::optional<std::filesystem::path>& grammar);

}  // namespace cohref
