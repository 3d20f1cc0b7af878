#include "cohref/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cohref/errors.hpp"

namespace cohref {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;  // current row has content
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw FormatError("unterminated quoted field", rows.size() + 1);
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

constexpr std::array<std::string_view, 11> kColumns{"utterance", "h0", "s0", "l0", "h1", "s1",
                                                    "l1",        "h2", "s2", "l2", "target_index"};

bool blank(const std::vector<std::string>& row) {
  return std::all_of(row.begin(), row.end(), [](const std::string& f) {
    return f.find_first_not_of(" \t") == std::string::npos;
  });
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_number(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  std::istringstream is(t);
  is.imbue(std::locale::classic());
  double v = 0.0;
  is >> v;
  if (is.fail() || !is.eof() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

IngestReport ingest_cic_text(std::string_view text) {
  IngestReport report;
  const auto rows = parse_csv(text);
  std::size_t first = 0;
  while (first < rows.size() && blank(rows[first])) ++first;
  if (first == rows.size()) {
    report.warnings.push_back("corpus file is empty");
    return report;
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[first].size(); ++i) {
    std::string name = trim(rows[first][i]);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    col.emplace(name, i);
  }
  std::string missing;
  for (auto c : kColumns) {
    if (!col.count(std::string(c))) missing += (missing.empty() ? "" : ", ") + std::string(c);
  }
  if (!missing.empty()) throw FormatError("corpus header lacks columns: " + missing, first + 1);

  for (std::size_t r = first + 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (blank(row)) continue;
    auto field = [&](std::string_view name) -> std::optional<std::string> {
      const std::size_t i = col.at(std::string(name));
      if (i >= row.size()) return std::nullopt;
      return row[i];
    };
    const auto utt = field("utterance");
    if (!utt || trim(*utt).empty()) {
      report.skipped.emplace_back(line, "empty utterance");
      continue;
    }
    std::array<ColorPatch, kNumPatches> patches;
    std::string problem;
    for (std::size_t k = 0; k < kNumPatches && problem.empty(); ++k) {
      const auto idx = std::to_string(k);
      std::array<double, 3> v{};
      const std::array<std::string, 3> names{"h" + idx, "s" + idx, "l" + idx};
      for (std::size_t c = 0; c < 3; ++c) {
        const auto f = field(names[c]);
        const auto n = f ? to_number(*f) : std::nullopt;
        if (!n) {
          problem = "bad value in column " + names[c];
          break;
        }
        v[c] = *n;
      }
      if (!problem.empty()) break;
      double s = v[1] > 1.0 ? v[1] / 100.0 : v[1];
      double l = v[2] > 1.0 ? v[2] / 100.0 : v[2];
      if (s < 0.0 || s > 1.0 || l < 0.0 || l > 1.0) {
        problem = "saturation or lightness out of range for patch " + idx;
        break;
      }
      patches[k] = ColorPatch(v[0], s, l);
    }
    if (!problem.empty()) {
      report.skipped.emplace_back(line, problem);
      continue;
    }
    const auto tf = field("target_index");
    const auto t = tf ? to_number(*tf) : std::nullopt;
    if (!t || *t != std::floor(*t) || *t < 0.0 || *t >= static_cast<double>(kNumPatches)) {
      report.skipped.emplace_back(line, "target_index must be 0, 1 or 2");
      continue;
    }
    report.items.push_back({trim(*utt), DisplayContext(patches, static_cast<std::size_t>(*t))});
  }
  if (report.items.empty()) report.warnings.push_back("corpus has no usable rows");
  return report;
}

IngestReport ingest_cic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ingest_cic_text(ss.str());
}

std::string corpus_to_csv(const std::vector<CorpusItem>& items) {
  std::ostringstream os;
  os.precision(17);
  os << "utterance,h0,s0,l0,h1,s1,l1,h2,s2,l2,target_index\n";
  for (const auto& it : items) {
    os << csv_escape(it.utterance);
    for (const auto& p : it.context.patches) os << ',' << p.hue << ',' << p.sat << ',' << p.light;
    os << ',' << it.context.target_index() << '\n';
  }
  return os.str();
}

std::string to_string(Coverage c) {
  switch (c) {
    case Coverage::Complete: return "complete";
    case Coverage::OneFragment: return "one_nopp";
    case Coverage::TwoFragments: return "two_nopps";
    case Coverage::ThreeOrMoreFragments: return "three_or_more_nopps";
    case Coverage::NoParse: return "no_parse";
  }
  return "?";
}

Coverage classify_parse(const ParseOutcome& outcome) {
  if (outcome.complete()) return Coverage::Complete;
  if (outcome.none()) return Coverage::NoParse;
  const std::size_t n = std::get<PartialParse>(outcome.value).fragments.size();
  if (n == 1) return Coverage::OneFragment;
  if (n == 2) return Coverage::TwoFragments;
  return Coverage::ThreeOrMoreFragments;
}

std::optional<double> FirstUtteranceReport::success_rate() const {
  if (evaluated == 0) return std::nullopt;
  return static_cast<double>(successes) / static_cast<double>(evaluated);
}

double FirstUtteranceReport::coverage_rate(Coverage c) const {
  if (total == 0) return 0.0;
  return static_cast<double>(coverage[static_cast<std::size_t>(c)]) / static_cast<double>(total);
}

nlohmann::json FirstUtteranceReport::to_json() const {
  nlohmann::json cov = nlohmann::json::object();
  for (std::size_t k = 0; k < kCoverageKinds; ++k) {
    const auto c = static_cast<Coverage>(k);
    cov[to_string(c)] = {{"count", coverage[k]}, {"rate", coverage_rate(c)}};
  }
  const auto rate = success_rate();
  return {{"rows", total},
          {"evaluated", evaluated},
          {"successes", successes},
          {"success_rate", rate ? nlohmann::json(*rate) : nlohmann::json("n/a")},
          {"coverage", cov}};
}

FirstUtteranceReport first_utterance_eval(const std::vector<CorpusItem>& corpus,
                                          const ColorSemantics& semantics, const Pcfg& pcfg) {
  FirstUtteranceReport rep;
  BaselinePolicy unused;
  for (const auto& item : corpus) {
    ++rep.total;
    const auto tokens = tokenize(item.utterance, semantics.lexicon());
    const ParseOutcome outcome =
        tokens.empty() ? ParseOutcome{NoParse{}} : astar_best_parse(pcfg, tokens);
    const Coverage c = classify_parse(outcome);
    ++rep.coverage[static_cast<std::size_t>(c)];
    if (c != Coverage::Complete) continue;
    ++rep.evaluated;
    Matcher m(semantics, pcfg, unused, item.context);
    if (m.absorb(item.utterance) == Uptake::NotUnderstood) continue;
    if (m.posterior().unique_argmax(item.context.target_index())) ++rep.successes;
  }
  return rep;
}

std::vector<CorpusItem> synthetic_corpus(const ColorSemantics& semantics, std::size_t rows,
                                         std::uint64_t seed, ContextMode mode) {
  std::vector<CorpusItem> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    Rng rng = stream_rng(seed, 8, i);
    DisplayContext ctx = sample_context(rng, mode);
    const auto& term = semantics.best_identifying_expression(ctx, ctx.target_index());
    out.push_back({term.label, ctx});
  }
  return out;
}

}  // namespace cohref
