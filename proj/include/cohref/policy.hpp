#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohref/color.hpp"

namespace cohref {

enum class Action : std::uint8_t { AskClarification = 0, Select = 1 };
inline constexpr std::size_t kNumActions = 2;

std::string to_string(Action a);

inline constexpr std::size_t kMaxTurns = 15;
inline constexpr std::size_t kFeatureDim = kNumPatches + kMaxTurns * kNumActions;  // 33

using Features = std::array<double, kFeatureDim>;

// Posterior over the candidates plus the matcher's prior actions.
struct DialogueState {
  PatchDistribution posterior{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::vector<Action> history;

  std::size_t turn() const { return history.size(); }

  // Posterior sorted in descending order (so the first feature is the
  // confidence in the best candidate), then one (turn, action) one-hot slot
  // per past turn; unused slots are zero.
  Features features() const;
};

struct RewardSchedule {
  double select_correct = 0.3;
  double select_wrong = -0.5;
  double ask = -0.1;
  double timeout = -1.0;
};

// `turn` is the 1-based turn at which the action is taken. Asking at the
// final turn ends the dialogue in failure and earns the timeout reward.
double reward(Action action, std::optional<bool> correct, std::size_t turn,
              const RewardSchedule& schedule = {});

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action decide(const DialogueState& state) = 0;
  virtual std::string name() const = 0;
};

inline constexpr double kBaselineThreshold = 0.95;

// Select iff the most likely referent has probability above the threshold.
Action baseline_decide(const DialogueState& state, double threshold = kBaselineThreshold);

class BaselinePolicy final : public Policy {
 public:
  explicit BaselinePolicy(double threshold = kBaselineThreshold) : threshold_(threshold) {}
  Action decide(const DialogueState& state) override { return baseline_decide(state, threshold_); }
  std::string name() const override { return "baseline"; }

 private:
  double threshold_;
};

// Linear action values, one weight row per action; zero-initialized.
class QFunction {
 public:
  using Weights = std::array<Features, kNumActions>;

  QFunction() { weights_.fill(Features{}); }
  explicit QFunction(const Weights& w) : weights_(w) {}

  std::array<double, kNumActions> q_values(const Features& x) const;
  std::array<double, kNumActions> q_values(const DialogueState& s) const {
    return q_values(s.features());
  }
  // Argmax; ties go to AskClarification.
  Action greedy(const Features& x) const;

  const Weights& weights() const { return weights_; }
  Weights& weights() { return weights_; }
  bool operator==(const QFunction&) const = default;

 private:
  Weights weights_;
};

// Epsilon-greedy; always consumes exactly one draw for the exploration test
// and one more when exploring.
Action select_action(const QFunction& qf, const DialogueState& state, double epsilon, Rng& rng);

class GreedyQPolicy final : public Policy {
 public:
  explicit GreedyQPolicy(QFunction qf) : qf_(std::move(qf)) {}
  Action decide(const DialogueState& state) override { return qf_.greedy(state.features()); }
  std::string name() const override { return "dqn"; }
  const QFunction& qfunction() const { return qf_; }

 private:
  QFunction qf_;
};

class EpsilonGreedyPolicy final : public Policy {
 public:
  EpsilonGreedyPolicy(const QFunction& qf, Rng& rng) : qf_(qf), rng_(rng) {}
  void set_epsilon(double e) { epsilon_ = e; }
  double epsilon() const { return epsilon_; }
  Action decide(const DialogueState& state) override {
    return select_action(qf_, state, epsilon_, rng_);
  }
  std::string name() const override { return "epsilon-greedy"; }

 private:
  const QFunction& qf_;
  Rng& rng_;
  double epsilon_ = 1.0;
};

struct Transition {
  Features state{};
  Action action = Action::AskClarification;
  double reward = 0.0;
  std::optional<Features> next;  // empty when terminal
};

// Fixed-capacity circular memory that overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 200);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  std::uint64_t total_pushed() const { return pushed_; }

  // Oldest first.
  std::vector<Transition> contents() const;

  // `n` distinct entries drawn uniformly without replacement; n is capped at
  // size().
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
  std::uint64_t pushed_ = 0;
};

struct TrainConfig {
  std::size_t batch_size = 24;
  double gamma = 1.0;
  double learning_rate = 0.001;
  double weight_decay = 0.01;
  std::size_t target_sync_every = 20;
  std::size_t episodes = 4000;
  std::size_t max_turns = kMaxTurns;
  std::size_t replay_capacity = 200;
  double huber_delta = 1.0;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_episodes = 1000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Linear decay from epsilon_start to epsilon_end over the decay window.
double epsilon_for_episode(const TrainConfig& cfg, std::size_t episode);

double huber(double delta, double threshold = 1.0);

struct AdamState {
  QFunction::Weights m{};
  QFunction::Weights v{};
  std::uint64_t step = 0;
};

// One gradient step on the mean Huber loss of the TD error
// Q_policy(s, a) - (r + gamma * max_a' Q_target(s', a')), with the bootstrap
// term dropped for terminal samples. L2 weight decay is added to the
// gradient before the Adam update. Returns the pre-update mean loss; an
// empty batch is a no-op returning 0.
double dqn_update(QFunction& policy, const QFunction& target,
                  std::span<const Transition* const> batch, const TrainConfig& cfg,
                  AdamState& adam);

inline void sync_target(const QFunction& policy, QFunction& target) { target = policy; }

// Replay memory, optimizer and the two networks.
class DqnLearner {
 public:
  explicit DqnLearner(TrainConfig cfg);

  // Stores the transition and runs one update on a sampled batch; returns
  // the batch loss.
  double observe(Transition t, Rng& rng);

  const QFunction& policy_net() const { return policy_; }
  const QFunction& target_net() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const TrainConfig& config() const { return cfg_; }
  std::uint64_t updates() const { return updates_; }
  std::uint64_t syncs() const { return syncs_; }

 private:
  TrainConfig cfg_;
  QFunction policy_;
  QFunction target_;
  ReplayBuffer buffer_;
  AdamState adam_;
  std::uint64_t updates_ = 0;
  std::uint64_t syncs_ = 0;
};

struct ModelFile {
  QFunction qf;
  TrainConfig config;
  std::uint64_t seed = 0;
  double p_x = 0.0;
};

nlohmann::json model_to_json(const ModelFile& m);
ModelFile model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const ModelFile& m);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace cohref
