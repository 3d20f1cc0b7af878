#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohref/color.hpp"
#include "cohref/dialogue.hpp"
#include "cohref/evaluation.hpp"
#include "cohref/grammar.hpp"
#include "cohref/policy.hpp"

namespace cohref {

// Mixed draws far, close or split with equal probability per context.
enum class ContextMode { Random, Far, Close, Split, Mixed };
std::string to_string(ContextMode m);
ContextMode context_mode_from_string(const std::string& s);

struct ContextThresholds {
  double close_below = 20.0;
  double far_above = 60.0;
  std::size_t max_tries = 10000;
};

// Three patches with the hue-gap constraint of `mode`; target uniform.
// Throws Error when rejection sampling runs out of tries.
DisplayContext sample_context(Rng& rng, ContextMode mode, const ContextThresholds& th = {});

struct SimUserConfig {
  double p_x = 0.4;  // probability of a merely-true description
  std::uint64_t seed = 0;

  void validate() const;
};

// With probability p_x a merely-true term, otherwise the most identifying
// unused term. Returns the term label, which doubles as the utterance.
std::string sim_first_description(const ColorSemantics& semantics, const DisplayContext& ctx,
                                  const SimUserConfig& cfg, Rng& rng,
                                  const std::set<std::string>& used = {});

struct SimResponse {
  bool confirm = false;
  std::optional<std::string> replacement;  // new description on rejection

  std::string utterance() const;
};

// Confirms iff the target is the unique most likely patch once the
// clarification term is conjoined with the current evidence.
SimResponse sim_respond_to_clarification(const ColorSemantics& semantics,
                                         const DisplayContext& ctx,
                                         const std::string& clarification_term,
                                         const std::vector<Formula>& current_constraints,
                                         const SimUserConfig& cfg, Rng& rng,
                                         const std::set<std::string>& used);

enum class Outcome { Success, Failure, Timeout };
std::string to_string(Outcome o);

struct TurnRecord {
  std::string director;  // utterance that opened this turn
  Action action = Action::AskClarification;
  std::string reply;
  PatchDistribution posterior{};
  double reward = 0.0;
};

struct EpisodeLog {
  DisplayContext context;
  std::vector<TurnRecord> turns;
  Outcome outcome = Outcome::Timeout;
  double total_return = 0.0;

  nlohmann::json to_json() const;
};

// Sees (state, action, reward, next state or terminal) as the episode runs.
using TransitionSink = std::function<void(const Transition&)>;

struct Environment {
  const ColorSemantics& semantics;
  const Pcfg& pcfg;
  RewardSchedule rewards{};
};

EpisodeLog run_episode(Policy& policy, const Environment& env, const SimUserConfig& cfg,
                       const DisplayContext& ctx, Rng& rng, const TransitionSink& sink = {});

// Independent stream per (seed, purpose, index) so that episodes do not
// depend on how many draws earlier ones made.
Rng stream_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);

enum StreamPurpose : std::uint64_t {
  kTrainContexts = 1,
  kTrainEpisodes = 2,
  kLearner = 3,
  kEvalContexts = 4,
  kEvalEpisodes = 5,
  kHistogramContexts = 6,
};

struct EvalSummary {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t timeouts = 0;
  double mean_return = 0.0;
  double mean_turns = 0.0;
  std::vector<EpisodeLog> logs;

  double success_rate() const {
    return episodes ? static_cast<double>(successes) / static_cast<double>(episodes) : 0.0;
  }
  nlohmann::json to_json() const;
};

// Runs `episodes` fresh episodes; identical seeds give identical contexts
// and director behavior for any policy.
EvalSummary evaluate_policy(Policy& policy, const Environment& env, const SimUserConfig& cfg,
                            ContextMode mode, std::size_t episodes, std::uint64_t seed,
                            bool keep_logs = false);

struct TrainResult {
  QFunction qf;
  std::vector<double> episode_loss;    // mean batch loss over the episode
  std::vector<double> episode_return;
  std::uint64_t updates = 0;
  std::uint64_t syncs = 0;
  EvalSummary evaluation;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  double p_x = 0.4;
  ContextMode mode = ContextMode::Mixed;
  TrainConfig train;
  std::size_t eval_episodes = 400;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

using EpisodeCallback = std::function<void(std::size_t, const EpisodeLog&, double)>;

TrainResult train_policy(const Environment& env, const ExperimentConfig& cfg,
                         const EpisodeCallback& on_episode = {});

inline constexpr std::size_t kHistogramBins = 10;

struct ClarificationHistogram {
  std::array<std::size_t, kHistogramBins> select{};
  std::array<std::size_t, kHistogramBins> ask{};

  static std::size_t bin_of(double max_prob);
  std::size_t total() const;
  // Clarifications in bins whose lower edge is at least `lower`.
  std::size_t asks_at_or_above(double lower) const;
  std::string to_csv() const;
};

// First-turn states: the simulated director's opening description at the
// given p_x, absorbed into a fresh matcher.
std::vector<DialogueState> first_turn_states(const Environment& env, const SimUserConfig& cfg,
                                             ContextMode mode, std::size_t count,
                                             std::uint64_t seed);

ClarificationHistogram clarification_histogram(Policy& policy,
                                               const std::vector<DialogueState>& states);

std::string curves_to_csv(const TrainResult& r);

}  // namespace cohref
