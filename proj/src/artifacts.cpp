#include "cohref/artifacts.hpp"

#include <cstdlib>

#include "cohref/errors.hpp"

namespace cohref {

std::filesystem::path resolve_data_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv(kDataDirEnv); env && *env) return env;
  return "data";
}

std::unique_ptr<Artifacts> load_artifacts(const std::filesystem::path& lexicon,
                                          const std::optional<std::filesystem::path>& grammar) {
  ColorSemantics semantics(load_lexicon(lexicon));
  Pcfg pcfg = grammar ? load_grammar(*grammar, semantics.lexicon())
                      : default_pcfg(semantics.lexicon());
  return std::make_unique<Artifacts>(Artifacts{std::move(semantics), std::move(pcfg)});
}

}  // namespace cohref
