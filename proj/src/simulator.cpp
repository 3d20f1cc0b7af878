#include "cohref/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cohref/errors.hpp"

namespace cohref {

std::string to_string(ContextMode m) {
  switch (m) {
    case ContextMode::Random: return "random";
    case ContextMode::Far: return "far";
    case ContextMode::Close: return "close";
    case ContextMode::Split: return "split";
    case ContextMode::Mixed: return "mixed";
  }
  return "?";
}

ContextMode context_mode_from_string(const std::string& s) {
  if (s == "random") return ContextMode::Random;
  if (s == "far") return ContextMode::Far;
  if (s == "close") return ContextMode::Close;
  if (s == "split") return ContextMode::Split;
  if (s == "mixed") return ContextMode::Mixed;
  throw ValidationError("unknown context mode '" + s + "'");
}

namespace {

bool satisfies(const std::array<ColorPatch, kNumPatches>& p, ContextMode mode,
               const ContextThresholds& th) {
  const double d01 = hue_distance(p[0].hue, p[1].hue);
  const double d02 = hue_distance(p[0].hue, p[2].hue);
  const double d12 = hue_distance(p[1].hue, p[2].hue);
  auto close = [&](double d) { return d < th.close_below; };
  auto far = [&](double d) { return d > th.far_above; };
  switch (mode) {
    case ContextMode::Random:
    case ContextMode::Mixed: return true;
    case ContextMode::Far: return far(d01) && far(d02) && far(d12);
    case ContextMode::Close: return close(d01) && close(d02) && close(d12);
    case ContextMode::Split:
      return (close(d01) && far(d02) && far(d12)) || (close(d02) && far(d01) && far(d12)) ||
             (close(d12) && far(d01) && far(d02));
  }
  return false;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

}  // namespace

DisplayContext sample_context(Rng& rng, ContextMode mode, const ContextThresholds& th) {
  if (mode == ContextMode::Mixed) {
    constexpr std::array<ContextMode, 3> kinds{ContextMode::Far, ContextMode::Close,
                                               ContextMode::Split};
    mode = kinds[uniform_index(rng, kinds.size())];
  }
  for (std::size_t attempt = 0; attempt < th.max_tries; ++attempt) {
    std::array<ColorPatch, kNumPatches> p;
    for (auto& patch : p) {
      const double h = uniform01(rng) * 360.0;
      const double s = uniform01(rng);
      const double l = uniform01(rng);
      patch = ColorPatch(h, s, l);
    }
    if (satisfies(p, mode, th)) return DisplayContext(p, uniform_index(rng, kNumPatches));
  }
  throw Error("could not sample a " + to_string(mode) + " context in " +
              std::to_string(th.max_tries) + " tries");
}

void SimUserConfig::validate() const {
  if (!(p_x >= 0.0 && p_x <= 1.0)) throw ValidationError("p_x must lie in [0, 1]");
}

std::string sim_first_description(const ColorSemantics& semantics, const DisplayContext& ctx,
                                  const SimUserConfig& cfg, Rng& rng,
                                  const std::set<std::string>& used) {
  const std::size_t target = ctx.target_index();
  const bool merely_true = uniform01(rng) < cfg.p_x;
  const std::set<std::string>& avoid =
      used.size() >= semantics.lexicon().size() ? std::set<std::string>{} : used;
  if (merely_true) return semantics.sample_true_description(ctx, target, rng, avoid).label;
  return semantics.best_identifying_expression(ctx, target, avoid).label;
}

std::string SimResponse::utterance() const {
  if (confirm) return "yes";
  return replacement ? "no " + *replacement : "no";
}

SimResponse sim_respond_to_clarification(const ColorSemantics& semantics,
                                         const DisplayContext& ctx,
                                         const std::string& clarification_term,
                                         const std::vector<Formula>& current_constraints,
                                         const SimUserConfig& cfg, Rng& rng,
                                         const std::set<std::string>& used) {
  std::vector<Formula> tentative = current_constraints;
  tentative.push_back(Formula::atom(clarification_term));
  const Posterior p =
      Evaluator(semantics).posterior_over_constraints(tentative, ctx.without_target());
  SimResponse r;
  r.confirm = p.unique_argmax(ctx.target_index());
  if (!r.confirm) r.replacement = sim_first_description(semantics, ctx, cfg, rng, used);
  return r;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Failure: return "failure";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

namespace {

nlohmann::json context_to_json(const DisplayContext& ctx) {
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& p : ctx.patches) patches.push_back({p.hue, p.sat, p.light});
  nlohmann::json j{{"patches", patches}};
  if (ctx.target) j["target"] = *ctx.target;
  return j;
}

}  // namespace

nlohmann::json EpisodeLog::to_json() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : turns) {
    ts.push_back({{"director", t.director},
                  {"action", cohref::to_string(t.action)},
                  {"reply", t.reply},
                  {"posterior", t.posterior},
                  {"reward", t.reward}});
  }
  return {{"context", context_to_json(context)},
          {"turns", ts},
          {"outcome", cohref::to_string(outcome)},
          {"return", total_return}};
}

EpisodeLog run_episode(Policy& policy, const Environment& env, const SimUserConfig& cfg,
                       const DisplayContext& ctx, Rng& rng, const TransitionSink& sink) {
  const std::size_t target = ctx.target_index();
  Matcher matcher(env.semantics, env.pcfg, policy, ctx);
  EpisodeLog log;
  log.context = ctx;

  std::optional<Transition> pending;
  std::string utterance = sim_first_description(env.semantics, ctx, cfg, rng, matcher.used_terms());
  while (true) {
    matcher.absorb(utterance);
    const Features s = matcher.state().features();
    if (pending) {
      pending->next = s;
      if (sink) sink(*pending);
      pending.reset();
    }
    const std::vector<Formula> evidence = matcher.constraints();
    const MatcherReply reply = matcher.respond();

    double r = 0.0;
    if (reply.kind == ReplyKind::Select) {
      r = reward(Action::Select, *reply.patch == target, reply.turn, env.rewards);
    } else {
      r = reward(Action::AskClarification, std::nullopt, reply.turn, env.rewards);
    }
    log.turns.push_back({utterance, reply.action, reply.text, reply.posterior.probs, r});
    log.total_return += r;

    Transition t{s, reply.action, r, std::nullopt};
    if (reply.terminal()) {
      if (sink) sink(t);
      if (reply.kind == ReplyKind::Timeout) {
        log.outcome = Outcome::Timeout;
      } else {
        log.outcome = *reply.patch == target ? Outcome::Success : Outcome::Failure;
      }
      return log;
    }
    pending = t;

    if (reply.kind == ReplyKind::Clarify) {
      utterance = sim_respond_to_clarification(env.semantics, ctx, *reply.term, evidence, cfg, rng,
                                               matcher.used_terms())
                      .utterance();
    } else {
      utterance = sim_first_description(env.semantics, ctx, cfg, rng, matcher.used_terms());
    }
  }
}

Rng stream_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

nlohmann::json EvalSummary::to_json() const {
  return {{"episodes", episodes},     {"successes", successes},
          {"failures", failures},     {"timeouts", timeouts},
          {"success_rate", success_rate()}, {"mean_return", mean_return},
          {"mean_turns", mean_turns}};
}

EvalSummary evaluate_policy(Policy& policy, const Environment& env, const SimUserConfig& cfg,
                            ContextMode mode, std::size_t episodes, std::uint64_t seed,
                            bool keep_logs) {
  cfg.validate();
  EvalSummary s;
  s.episodes = episodes;
  double total_return = 0.0;
  double total_turns = 0.0;
  for (std::size_t i = 0; i < episodes; ++i) {
    Rng crng = stream_rng(seed, kEvalContexts, i);
    const DisplayContext ctx = sample_context(crng, mode);
    Rng erng = stream_rng(seed, kEvalEpisodes, i);
    EpisodeLog log = run_episode(policy, env, cfg, ctx, erng);
    switch (log.outcome) {
      case Outcome::Success: ++s.successes; break;
      case Outcome::Failure: ++s.failures; break;
      case Outcome::Timeout: ++s.timeouts; break;
    }
    total_return += log.total_return;
    total_turns += static_cast<double>(log.turns.size());
    if (keep_logs) s.logs.push_back(std::move(log));
  }
  if (episodes) {
    s.mean_return = total_return / static_cast<double>(episodes);
    s.mean_turns = total_turns / static_cast<double>(episodes);
  }
  return s;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"seed", seed},
          {"p_x", p_x},
          {"episodes", train.episodes},
          {"context_mode", cohref::to_string(mode)},
          {"eval_episodes", eval_episodes},
          {"train", train.to_json()}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.p_x = j.value("p_x", c.p_x);
    c.mode = context_mode_from_string(j.value("context_mode", std::string("mixed")));
    c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
    if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
    if (j.contains("episodes")) c.train.episodes = j.at("episodes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad experiment config: ") + e.what());
  }
  SimUserConfig{c.p_x, c.seed}.validate();
  c.train.validate();
  return c;
}

TrainResult train_policy(const Environment& env, const ExperimentConfig& cfg,
                         const EpisodeCallback& on_episode) {
  const SimUserConfig sim{cfg.p_x, cfg.seed};
  sim.validate();
  DqnLearner learner(cfg.train);
  Rng learner_rng = stream_rng(cfg.seed, kLearner, 0);
  Rng explore_rng = stream_rng(cfg.seed, kLearner, 1);
  EpsilonGreedyPolicy behavior(learner.policy_net(), explore_rng);

  TrainResult out;
  out.episode_loss.reserve(cfg.train.episodes);
  out.episode_return.reserve(cfg.train.episodes);
  for (std::size_t e = 0; e < cfg.train.episodes; ++e) {
    behavior.set_epsilon(epsilon_for_episode(cfg.train, e));
    Rng crng = stream_rng(cfg.seed, kTrainContexts, e);
    const DisplayContext ctx = sample_context(crng, cfg.mode);
    Rng erng = stream_rng(cfg.seed, kTrainEpisodes, e);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    const EpisodeLog log = run_episode(behavior, env, sim, ctx, erng, [&](const Transition& t) {
      loss_sum += learner.observe(t, learner_rng);
      ++steps;
    });
    const double loss = steps ? loss_sum / static_cast<double>(steps) : 0.0;
    out.episode_loss.push_back(loss);
    out.episode_return.push_back(log.total_return);
    if (on_episode) on_episode(e, log, loss);
  }
  out.qf = learner.policy_net();
  out.updates = learner.updates();
  out.syncs = learner.syncs();
  GreedyQPolicy greedy(out.qf);
  out.evaluation = evaluate_policy(greedy, env, sim, cfg.mode, cfg.eval_episodes, cfg.seed);
  return out;
}

std::size_t ClarificationHistogram::bin_of(double max_prob) {
  if (!(max_prob > 0.0)) return 0;
  return std::min(kHistogramBins - 1, static_cast<std::size_t>(std::floor(max_prob * 10.0)));
}

std::size_t ClarificationHistogram::total() const {
  std::size_t n = 0;
  for (std::size_t b = 0; b < kHistogramBins; ++b) n += select[b] + ask[b];
  return n;
}

std::size_t ClarificationHistogram::asks_at_or_above(double lower) const {
  std::size_t n = 0;
  for (std::size_t b = 0; b < kHistogramBins; ++b)
    if (static_cast<double>(b) / 10.0 >= lower - 1e-12) n += ask[b];
  return n;
}

std::string ClarificationHistogram::to_csv() const {
  std::ostringstream os;
  os << "bin_low,bin_high,select,ask\n";
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    os << static_cast<double>(b) / 10.0 << ',' << static_cast<double>(b + 1) / 10.0 << ','
       << select[b] << ',' << ask[b] << '\n';
  }
  return os.str();
}

std::vector<DialogueState> first_turn_states(const Environment& env, const SimUserConfig& cfg,
                                             ContextMode mode, std::size_t count,
                                             std::uint64_t seed) {
  cfg.validate();
  std::vector<DialogueState> out;
  out.reserve(count);
  BaselinePolicy unused;
  for (std::size_t i = 0; i < count; ++i) {
    Rng crng = stream_rng(seed, kHistogramContexts, 2 * i);
    const DisplayContext ctx = sample_context(crng, mode);
    Rng drng = stream_rng(seed, kHistogramContexts, 2 * i + 1);
    Matcher m(env.semantics, env.pcfg, unused, ctx);
    m.absorb(sim_first_description(env.semantics, ctx, cfg, drng));
    out.push_back(m.state());
  }
  return out;
}

ClarificationHistogram clarification_histogram(Policy& policy,
                                               const std::vector<DialogueState>& states) {
  ClarificationHistogram h;
  for (const auto& s : states) {
    const double best = *std::max_element(s.posterior.begin(), s.posterior.end());
    const std::size_t b = ClarificationHistogram::bin_of(best);
    if (policy.decide(s) == Action::Select) {
      ++h.select[b];
    } else {
      ++h.ask[b];
    }
  }
  return h;
}

std::string curves_to_csv(const TrainResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "episode,loss,reward\n";
  for (std::size_t e = 0; e < r.episode_loss.size(); ++e) {
    os << e << ',' << r.episode_loss[e] << ',' << r.episode_return[e] << '\n';
  }
  return os.str();
}

}  // namespace cohref
