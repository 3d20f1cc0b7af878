#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cohref/artifacts.hpp"
#include "cohref/corpus.hpp"
#include "cohref/errors.hpp"
#include "cohref/service.hpp"
#include "cohref/session.hpp"
#include "cohref/simulator.hpp"

using namespace cohref;

namespace {

struct Common {
  std::string data_dir;
  std::string lexicon;
  std::string grammar;
  std::uint64_t seed = 1;
};

std::unique_ptr<Artifacts> load(const Common& c) {
  const auto dir = resolve_data_dir(c.data_dir.empty() ? std::nullopt
                                                       : std::optional<std::string>(c.data_dir));
  const std::filesystem::path lex = c.lexicon.empty() ? dir / "lexicon.jsonl" : std::filesystem::path(c.lexicon);
  std::optional<std::filesystem::path> gram;
  if (!c.grammar.empty()) {
    gram = c.grammar;
  } else if (std::filesystem::exists(dir / "grammar.txt")) {
    gram = dir / "grammar.txt";
  }
  return load_artifacts(lex, gram);
}

PolicyFactory policy_factory(const std::string& model_path) {
  if (model_path.empty()) return [] { return std::make_unique<BaselinePolicy>(); };
  const ModelFile m = load_model(model_path);
  return [qf = m.qf] { return std::make_unique<GreedyQPolicy>(qf); };
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// HSL to 8-bit RGB for terminal swatches.
std::array<int, 3> to_rgb(const ColorPatch& p) {
  const double c = (1.0 - std::fabs(2.0 * p.light - 1.0)) * p.sat;
  const double hp = p.hue / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = p.light - c / 2.0;
  auto to8 = [&](double v) { return static_cast<int>(std::lround(std::clamp(v + m, 0.0, 1.0) * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

void render(const DisplayContext& ctx, std::optional<std::size_t> mark) {
  for (std::size_t i = 0; i < kNumPatches; ++i) {
    const auto rgb = to_rgb(ctx.patches[i]);
    std::printf("  %zu \x1b[48;2;%d;%d;%dm        \x1b[0m%s", i, rgb[0], rgb[1], rgb[2],
                mark == i ? " <" : "  ");
  }
  std::printf("\n");
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Color reference matcher: training, evaluation, parsing and live play"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--data-dir", common.data_dir, "Data directory (default $COHREF_DATA or ./data)");
  app.add_option("--lexicon", common.lexicon, "Lexicon JSON lines file");
  app.add_option("--grammar", common.grammar, "Grammar file");
  app.add_option("--seed", common.seed, "Random seed");

  // train
  auto* train = app.add_subcommand("train", "Train a DQN policy against the simulated director");
  std::string train_config, model_out, curves_out, logs_out;
  std::optional<double> p_x;
  std::optional<std::size_t> episodes;
  std::optional<std::string> mode;
  train->add_option("--config", train_config, "Experiment config JSON");
  train->add_option("--p-x", p_x, "Probability of a merely-true description")->check(CLI::Range(0.0, 1.0));
  train->add_option("--episodes", episodes, "Training episodes");
  train->add_option("--mode", mode, "Context mode: random, far, close, split, mixed");
  train->add_option("-o,--out", model_out, "Model file to write")->required();
  train->add_option("--curves", curves_out, "CSV of per-episode loss and reward");
  train->add_option("--logs", logs_out, "Training episode logs as JSON lines");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a policy on fresh simulated games");
  std::string eval_model, eval_logs;
  double eval_px = 0.4;
  std::size_t eval_episodes = 400;
  std::string eval_mode = "mixed";
  eval->add_option("--model", eval_model, "Model file (baseline when omitted)");
  eval->add_option("--p-x", eval_px, "Probability of a merely-true description")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--episodes", eval_episodes, "Number of games");
  eval->add_option("--mode", eval_mode, "Context mode");
  eval->add_option("--logs", eval_logs, "Episode logs as JSON lines");

  // histogram
  auto* hist = app.add_subcommand("histogram", "First-turn ask/select counts by confidence bin");
  std::vector<std::string> hist_models;
  double hist_px = 0.5;
  std::size_t hist_count = 1000;
  std::string hist_mode = "mixed", hist_out;
  hist->add_option("--model", hist_models, "Model file; repeat to compare (baseline when omitted)");
  hist->add_option("--p-x", hist_px, "P_x used to draw the opening descriptions")->check(CLI::Range(0.0, 1.0));
  hist->add_option("--count", hist_count, "Number of first turns");
  hist->add_option("--mode", hist_mode, "Context mode");
  hist->add_option("-o,--out", hist_out, "CSV output (one block per model)");

  // induce-weights
  auto* induce = app.add_subcommand("induce-weights", "Fit grammar weights to a corpus");
  std::string induce_corpus, induce_out;
  double smoothing = kInductionSmoothing;
  induce->add_option("--corpus", induce_corpus, "Corpus CSV")->required();
  induce->add_option("--smoothing", smoothing, "Additive smoothing");
  induce->add_option("-o,--out", induce_out, "Weighted grammar file to write")->required();

  // parse
  auto* parse = app.add_subcommand("parse", "Show how utterances are parsed and interpreted");
  std::vector<std::string> parse_inputs;
  parse->add_option("utterances", parse_inputs, "Utterances to parse")->required();

  // play
  auto* play = app.add_subcommand("play", "Play a game in the terminal as the director");
  std::string play_model, play_mode = "mixed";
  play->add_option("--model", play_model, "Model file (baseline when omitted)");
  play->add_option("--mode", play_mode, "Context mode");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the game service");
  std::string host = "127.0.0.1", serve_model, records, static_dir, serve_mode = "mixed";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--model", serve_model, "Model file (baseline when omitted)");
  serve->add_option("--records", records, "Trial records JSON lines file");
  serve->add_option("--static", static_dir, "Directory with a browser client");
  serve->add_option("--mode", serve_mode, "Context mode for new games");

  // cic-eval
  auto* cic = app.add_subcommand("cic-eval", "First-utterance accuracy and parse coverage on a corpus");
  std::string cic_corpus, cic_write;
  std::size_t synthetic = 0;
  cic->add_option("--corpus", cic_corpus, "Corpus CSV");
  cic->add_option("--synthetic", synthetic, "Build this many rows from identifying descriptions instead");
  cic->add_option("--write", cic_write, "Also save the evaluated corpus as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto art = load(common);
      Environment env{art->semantics, art->pcfg};
      ExperimentConfig cfg;
      if (!train_config.empty()) {
        std::ifstream in(train_config);
        if (!in) throw Error("cannot open " + train_config);
        cfg = ExperimentConfig::from_json(nlohmann::json::parse(in));
      } else {
        cfg.seed = common.seed;
      }
      if (app.get_option("--seed")->count()) cfg.seed = common.seed;
      if (p_x) cfg.p_x = *p_x;
      if (episodes) cfg.train.episodes = *episodes;
      if (mode) cfg.mode = context_mode_from_string(*mode);
      cfg.train.validate();

      std::ofstream logs;
      if (!logs_out.empty()) {
        logs.open(logs_out);
        if (!logs) throw Error("cannot write " + logs_out);
      }
      const TrainResult r = train_policy(env, cfg, [&](std::size_t e, const EpisodeLog& log, double) {
        if (logs) logs << nlohmann::json{{"episode", e}, {"log", log.to_json()}}.dump() << '\n';
        if ((e + 1) % 500 == 0) std::cerr << "episode " << e + 1 << "/" << cfg.train.episodes << "\n";
      });
      save_model(model_out, ModelFile{r.qf, cfg.train, cfg.seed, cfg.p_x});
      if (!curves_out.empty()) write_file(curves_out, curves_to_csv(r));
      nlohmann::json out{{"config", cfg.to_json()},
                         {"updates", r.updates},
                         {"target_syncs", r.syncs},
                         {"evaluation", r.evaluation.to_json()}};
      std::cout << out.dump(2) << "\n";
    } else if (*eval) {
      auto art = load(common);
      Environment env{art->semantics, art->pcfg};
      auto policy = policy_factory(eval_model)();
      const EvalSummary s = evaluate_policy(*policy, env, SimUserConfig{eval_px, common.seed},
                                            context_mode_from_string(eval_mode), eval_episodes,
                                            common.seed, !eval_logs.empty());
      if (!eval_logs.empty()) {
        std::ofstream out(eval_logs);
        if (!out) throw Error("cannot write " + eval_logs);
        for (const auto& log : s.logs) out << log.to_json().dump() << '\n';
      }
      nlohmann::json j = s.to_json();
      j["policy"] = policy->name();
      std::cout << j.dump(2) << "\n";
    } else if (*hist) {
      auto art = load(common);
      Environment env{art->semantics, art->pcfg};
      const auto states = first_turn_states(env, SimUserConfig{hist_px, common.seed},
                                            context_mode_from_string(hist_mode), hist_count,
                                            common.seed);
      if (hist_models.empty()) hist_models.push_back("");
      std::ostringstream csv;
      for (const auto& m : hist_models) {
        auto policy = policy_factory(m)();
        const auto h = clarification_histogram(*policy, states);
        const std::string label = m.empty() ? "baseline" : m;
        csv << "# " << label << "\n" << h.to_csv();
        std::cout << label << ": asks at >= 0.8: " << h.asks_at_or_above(0.8) << " of "
                  << h.total() << " first turns\n"
                  << h.to_csv();
      }
      if (!hist_out.empty()) write_file(hist_out, csv.str());
    } else if (*induce) {
      auto art = load(common);
      const IngestReport ing = ingest_cic(induce_corpus);
      for (const auto& w : ing.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& [line, why] : ing.skipped) std::cerr << "skipped line " << line << ": " << why << "\n";
      Evaluator ev(art->semantics);
      const InductionReport rep = induce_pcfg_weights(
          art->pcfg.grammar(), art->semantics.lexicon(), ing.items,
          [&](const Formula& f, const DisplayContext& ctx) { return ev.eval_formula(f, ctx).probs; },
          smoothing);
      write_file(induce_out, rep.pcfg.to_text());
      std::cout << nlohmann::json{{"rows", ing.items.size()},
                                  {"used", rep.used},
                                  {"unparsed", rep.unparsed},
                                  {"uninterpretable_trees", rep.uninterpretable_trees}}
                       .dump(2)
                << "\n";
    } else if (*parse) {
      auto art = load(common);
      for (const auto& u : parse_inputs) {
        const Reading r = read_utterance(u, art->pcfg, art->semantics.lexicon());
        nlohmann::json j{{"utterance", u}, {"tokens", r.tokens}};
        j["coverage"] = to_string(classify_parse(r.outcome));
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : r.outcome.trees()) {
          trees.push_back({{"tree", t.bracketed()}, {"probability", t.probability}});
        }
        j["trees"] = trees;
        if (r.outcome.complete()) {
          j["derivations"] = std::get<CompleteParse>(r.outcome.value).tree_count;
        }
        j["formula"] = r.formula ? nlohmann::json(r.formula->to_string()) : nlohmann::json();
        if (!r.notes.empty()) j["notes"] = r.notes;
        std::cout << j.dump(2) << "\n";
      }
    } else if (*play) {
      auto art = load(common);
      Rng rng = stream_rng(common.seed, 9, 0);
      const DisplayContext ctx = sample_context(rng, context_mode_from_string(play_mode));
      Session s("terminal", ctx, art->semantics, art->pcfg, policy_factory(play_model)());
      std::printf("Describe the marked patch so the matcher can pick it. Type 'pick' to make it choose now.\n");
      render(ctx, ctx.target);
      std::string line;
      while (s.status() == SessionStatus::Open && std::cout << "> " << std::flush &&
             std::getline(std::cin, line)) {
        try {
          const MatcherReply r = line == "pick" ? s.force_select() : s.step(line);
          std::printf("matcher: %s\n", r.text.c_str());
          if (r.kind == ReplyKind::Select) {
            render(ctx, r.patch);
            std::printf("%s\n", *r.patch == ctx.target_index() ? "Correct." : "Wrong patch.");
          } else if (r.kind == ReplyKind::Timeout) {
            std::printf("Out of turns.\n");
          }
        } catch (const SessionError& e) {
          std::printf("%s\n", e.what());
        }
      }
    } else if (*serve) {
      auto art = load(common);
      ServiceConfig cfg;
      cfg.seed = common.seed;
      cfg.mode = context_mode_from_string(serve_mode);
      if (!records.empty()) cfg.records = records;
      SessionManager manager(art->semantics, art->pcfg, policy_factory(serve_model), cfg);
      Service service(manager, static_dir.empty() ? std::nullopt
                                                  : std::optional<std::filesystem::path>(static_dir));
      const int bound = service.bind(host, port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << bound << "\n";
      service.listen();
      g_service = nullptr;
    } else if (*cic) {
      auto art = load(common);
      std::vector<CorpusItem> items;
      if (synthetic > 0) {
        items = synthetic_corpus(art->semantics, synthetic, common.seed, ContextMode::Mixed);
      } else if (!cic_corpus.empty()) {
        const IngestReport ing = ingest_cic(cic_corpus);
        for (const auto& w : ing.warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& [line, why] : ing.skipped) std::cerr << "skipped line " << line << ": " << why << "\n";
        items = ing.items;
      } else {
        throw ValidationError("give --corpus or --synthetic");
      }
      if (!cic_write.empty()) write_file(cic_write, corpus_to_csv(items));
      std::cout << first_utterance_eval(items, art->semantics, art->pcfg).to_json().dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
