#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>
#include <string>

#include "cohref/artifacts.hpp"
#include "cohref/corpus.hpp"
#include "cohref/errors.hpp"
#include "cohref/session.hpp"
#include "cohref/simulator.hpp"

namespace py = pybind11;
using namespace cohref;
using nlohmann::json;

namespace {

// Everything crosses the boundary as JSON text; the Python layer decodes it.
class Engine {
 public:
  Engine(const std::string& lexicon, const std::optional<std::string>& grammar)
      : art_(load_artifacts(lexicon, grammar ? std::optional<std::filesystem::path>(*grammar)
                                             : std::nullopt)) {}

  std::string parse(const std::string& utterance) const {
    const Reading r = read_utterance(utterance, art_->pcfg, art_->semantics.lexicon());
    json trees = json::array();
    for (const auto& t : r.outcome.trees()) trees.push_back(t.bracketed());
    return json{{"tokens", r.tokens},
                {"coverage", to_string(classify_parse(r.outcome))},
                {"trees", trees},
                {"formula", r.formula ? json(r.formula->to_string()) : json()},
                {"notes", r.notes}}
        .dump();
  }

  std::vector<double> evaluate(const std::string& formula, const std::string& context) const {
    const DisplayContext ctx = context_from_wire(json::parse(context));
    const auto p = Evaluator(art_->semantics).eval_formula(parse_formula(formula), ctx).probs;
    return {p.begin(), p.end()};
  }

  std::string train(const std::string& config) const {
    const ExperimentConfig cfg = ExperimentConfig::from_json(json::parse(config));
    const TrainResult r = train_policy(env(), cfg);
    return json{{"model", model_to_json(ModelFile{r.qf, cfg.train, cfg.seed, cfg.p_x})},
                {"episode_loss", r.episode_loss},
                {"episode_return", r.episode_return},
                {"updates", r.updates},
                {"target_syncs", r.syncs},
                {"evaluation", r.evaluation.to_json()}}
        .dump();
  }

  std::string evaluate_policy_json(const std::optional<std::string>& model, double p_x,
                                   const std::string& mode, std::size_t episodes,
                                   std::uint64_t seed) const {
    auto policy = make_policy(model);
    EvalSummary s = evaluate_policy(*policy, env(), SimUserConfig{p_x, seed},
                                    context_mode_from_string(mode), episodes, seed);
    json j = s.to_json();
    j["policy"] = policy->name();
    return j.dump();
  }

  std::string histogram(const std::optional<std::string>& model, double p_x,
                        const std::string& mode, std::size_t count, std::uint64_t seed) const {
    auto policy = make_policy(model);
    const auto states =
        first_turn_states(env(), SimUserConfig{p_x, seed}, context_mode_from_string(mode), count, seed);
    const auto h = clarification_histogram(*policy, states);
    return json{{"select", h.select}, {"ask", h.ask}, {"asks_at_or_above_0.8", h.asks_at_or_above(0.8)}}
        .dump();
  }

  std::string corpus_eval(const std::string& csv_text) const {
    const IngestReport ing = ingest_cic_text(csv_text);
    json j = first_utterance_eval(ing.items, art_->semantics, art_->pcfg).to_json();
    j["skipped"] = ing.skipped.size();
    j["warnings"] = ing.warnings;
    return j.dump();
  }

  std::string synthetic_corpus_csv(std::size_t rows, std::uint64_t seed, const std::string& mode) const {
    return corpus_to_csv(synthetic_corpus(art_->semantics, rows, seed, context_mode_from_string(mode)));
  }

  std::unique_ptr<Policy> make_policy(const std::optional<std::string>& model) const {
    if (!model) return std::make_unique<BaselinePolicy>();
    return std::make_unique<GreedyQPolicy>(model_from_json(json::parse(*model)).qf);
  }

  Environment env() const { return Environment{art_->semantics, art_->pcfg}; }
  const Artifacts& artifacts() const { return *art_; }

 private:
  std::unique_ptr<Artifacts> art_;
};

class Sessions {
 public:
  Sessions(std::shared_ptr<Engine> engine, const std::optional<std::string>& model,
           std::uint64_t seed, const std::string& mode, const std::optional<std::string>& records)
      : engine_(std::move(engine)),
        model_(model),
        manager_(engine_->artifacts().semantics, engine_->artifacts().pcfg,
                 [this] { return engine_->make_policy(model_); },
                 ServiceConfig{seed, context_mode_from_string(mode),
                               records ? std::optional<std::filesystem::path>(*records)
                                       : std::nullopt}) {}

  std::string handle(const std::string& message) {
    json in;
    try {
      in = json::parse(message);
    } catch (const json::exception& e) {
      return json{{"ok", false}, {"error", std::string("invalid JSON: ") + e.what()}}.dump();
    }
    py::gil_scoped_release release;
    return manager_.handle(in).dump();
  }

  std::size_t size() const { return manager_.session_count(); }

 private:
  std::shared_ptr<Engine> engine_;
  std::optional<std::string> model_;
  SessionManager manager_;
};

}  // namespace

PYBIND11_MODULE(_cohref, m) {
  py::register_exception<Error>(m, "CohrefError", PyExc_RuntimeError);

  py::class_<Engine, std::shared_ptr<Engine>>(m, "Engine")
      .def(py::init<const std::string&, const std::optional<std::string>&>(), py::arg("lexicon"),
           py::arg("grammar") = std::nullopt)
      .def("parse", &Engine::parse, py::arg("utterance"))
      .def("evaluate", &Engine::evaluate, py::arg("formula"), py::arg("context"))
      .def("train", &Engine::train, py::arg("config"), py::call_guard<py::gil_scoped_release>())
      .def("evaluate_policy", &Engine::evaluate_policy_json, py::arg("model"), py::arg("p_x"),
           py::arg("mode"), py::arg("episodes"), py::arg("seed"),
           py::call_guard<py::gil_scoped_release>())
      .def("histogram", &Engine::histogram, py::arg("model"), py::arg("p_x"), py::arg("mode"),
           py::arg("count"), py::arg("seed"))
      .def("corpus_eval", &Engine::corpus_eval, py::arg("csv_text"))
      .def("synthetic_corpus", &Engine::synthetic_corpus_csv, py::arg("rows"), py::arg("seed"),
           py::arg("mode"));

  py::class_<Sessions>(m, "Sessions")
      .def(py::init<std::shared_ptr<Engine>, const std::optional<std::string>&, std::uint64_t,
                    const std::string&, const std::optional<std::string>&>(),
           py::arg("engine"), py::arg("model") = std::nullopt, py::arg("seed") = 1,
           py::arg("mode") = "mixed", py::arg("records") = std::nullopt)
      .def("handle", &Sessions::handle, py::arg("message"))
      .def("__len__", &Sessions::size);
}
