#include "cohref/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include "cohref/errors.hpp"

namespace cohref {

std::string to_string(Action a) {
  return a == Action::Select ? "Select" : "AskClarification";
}

Features DialogueState::features() const {
  Features x{};
  PatchDistribution sorted = posterior;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (std::size_t i = 0; i < kNumPatches; ++i) x[i] = sorted[i];
  const std::size_t n = std::min(history.size(), kMaxTurns);
  for (std::size_t t = 0; t < n; ++t) {
    x[kNumPatches + t * kNumActions + static_cast<std::size_t>(history[t])] = 1.0;
  }
  return x;
}

double reward(Action action, std::optional<bool> correct, std::size_t turn,
              const RewardSchedule& s) {
  if (action == Action::Select) {
    if (!correct) throw ValidationError("Select reward needs an outcome");
    return *correct ? s.select_correct : s.select_wrong;
  }
  return turn >= kMaxTurns ? s.timeout : s.ask;
}

Action baseline_decide(const DialogueState& state, double threshold) {
  const double best = *std::max_element(state.posterior.begin(), state.posterior.end());
  return best > threshold ? Action::Select : Action::AskClarification;
}

std::array<double, kNumActions> QFunction::q_values(const Features& x) const {
  std::array<double, kNumActions> q{};
  for (std::size_t a = 0; a < kNumActions; ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) s += weights_[a][i] * x[i];
    q[a] = s;
  }
  return q;
}

Action QFunction::greedy(const Features& x) const {
  const auto q = q_values(x);
  return q[1] > q[0] ? Action::Select : Action::AskClarification;
}

Action select_action(const QFunction& qf, const DialogueState& state, double epsilon, Rng& rng) {
  if (uniform01(rng) < epsilon) {
    return uniform01(rng) < 0.5 ? Action::AskClarification : Action::Select;
  }
  return qf.greedy(state.features());
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
  if (capacity == 0) throw ValidationError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % data_.size();
  size_ = std::min(size_ + 1, data_.size());
  ++pushed_;
}

std::vector<Transition> ReplayBuffer::contents() const {
  std::vector<Transition> out;
  out.reserve(size_);
  const std::size_t start = (head_ + data_.size() - size_) % data_.size();
  for (std::size_t k = 0; k < size_; ++k) out.push_back(data_[(start + k) % data_.size()]);
  return out;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  n = std::min(n, size_);
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(size_);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t span = size_ - k;
    std::size_t j = k + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(span));
    if (j >= size_) j = size_ - 1;
    std::swap(idx[k], idx[j]);
    out.push_back(&data_[idx[k]]);
  }
  return out;
}

void TrainConfig::validate() const {
  if (batch_size == 0 || target_sync_every == 0 || episodes == 0 || max_turns == 0 ||
      replay_capacity == 0) {
    throw ValidationError("train config sizes must be positive");
  }
  if (!(gamma > 0.0) || !(learning_rate > 0.0) || !(weight_decay > 0.0) ||
      !(huber_delta > 0.0)) {
    throw ValidationError("train config rates must be positive");
  }
  if (max_turns > kMaxTurns) throw ValidationError("max_turns exceeds the feature horizon");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"gamma", gamma},
          {"learning_rate", learning_rate},
          {"weight_decay", weight_decay},
          {"target_sync_every", target_sync_every},
          {"episodes", episodes},
          {"max_turns", max_turns},
          {"replay_capacity", replay_capacity},
          {"huber_delta", huber_delta},
          {"epsilon_start", epsilon_start},
          {"epsilon_end", epsilon_end},
          {"epsilon_decay_episodes", epsilon_decay_episodes}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.gamma = j.value("gamma", c.gamma);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.target_sync_every = j.value("target_sync_every", c.target_sync_every);
  c.episodes = j.value("episodes", c.episodes);
  c.max_turns = j.value("max_turns", c.max_turns);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  c.huber_delta = j.value("huber_delta", c.huber_delta);
  c.epsilon_start = j.value("epsilon_start", c.epsilon_start);
  c.epsilon_end = j.value("epsilon_end", c.epsilon_end);
  c.epsilon_decay_episodes = j.value("epsilon_decay_episodes", c.epsilon_decay_episodes);
  c.validate();
  return c;
}

double epsilon_for_episode(const TrainConfig& cfg, std::size_t episode) {
  if (cfg.epsilon_decay_episodes == 0 || episode >= cfg.epsilon_decay_episodes) {
    return cfg.epsilon_end;
  }
  const double frac = static_cast<double>(episode) / static_cast<double>(cfg.epsilon_decay_episodes);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

double huber(double delta, double threshold) {
  const double a = std::fabs(delta);
  return a <= threshold ? 0.5 * delta * delta : threshold * (a - 0.5 * threshold);
}

namespace {

double huber_grad(double delta, double threshold) {
  if (std::fabs(delta) <= threshold) return delta;
  return delta > 0.0 ? threshold : -threshold;
}

}  // namespace

double dqn_update(QFunction& policy, const QFunction& target,
                  std::span<const Transition* const> batch, const TrainConfig& cfg,
                  AdamState& adam) {
  if (batch.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  QFunction::Weights grad{};
  double loss = 0.0;
  for (const Transition* t : batch) {
    const auto a = static_cast<std::size_t>(t->action);
    const double predicted = policy.q_values(t->state)[a];
    double y = t->reward;
    if (t->next) {
      const auto qn = target.q_values(*t->next);
      y += cfg.gamma * std::max(qn[0], qn[1]);
    }
    const double delta = predicted - y;
    loss += huber(delta, cfg.huber_delta);
    const double g = huber_grad(delta, cfg.huber_delta) * inv_n;
    for (std::size_t i = 0; i < kFeatureDim; ++i) grad[a][i] += g * t->state[i];
  }
  loss *= inv_n;

  auto& w = policy.weights();
  ++adam.step;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.step));
  for (std::size_t a = 0; a < kNumActions; ++a) {
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      const double g = grad[a][i] + cfg.weight_decay * w[a][i];
      adam.m[a][i] = cfg.adam_beta1 * adam.m[a][i] + (1.0 - cfg.adam_beta1) * g;
      adam.v[a][i] = cfg.adam_beta2 * adam.v[a][i] + (1.0 - cfg.adam_beta2) * g * g;
      const double mhat = adam.m[a][i] / bc1;
      const double vhat = adam.v[a][i] / bc2;
      w[a][i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
  return loss;
}

DqnLearner::DqnLearner(TrainConfig cfg) : cfg_(cfg), buffer_(cfg.replay_capacity) {
  cfg_.validate();
}

double DqnLearner::observe(Transition t, Rng& rng) {
  buffer_.push(std::move(t));
  const auto batch = buffer_.sample(cfg_.batch_size, rng);
  const double loss = dqn_update(policy_, target_, batch, cfg_, adam_);
  ++updates_;
  if (updates_ % cfg_.target_sync_every == 0) {
    sync_target(policy_, target_);
    ++syncs_;
  }
  return loss;
}

nlohmann::json model_to_json(const ModelFile& m) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& row : m.qf.weights()) w.push_back(std::vector<double>(row.begin(), row.end()));
  return {{"format", "cohref-qfunction"},
          {"feature_dim", kFeatureDim},
          {"actions", {to_string(Action::AskClarification), to_string(Action::Select)}},
          {"weights", w},
          {"train_config", m.config.to_json()},
          {"seed", m.seed},
          {"p_x", m.p_x}};
}

ModelFile model_from_json(const nlohmann::json& j) {
  ModelFile m;
  try {
    if (j.at("feature_dim").get<std::size_t>() != kFeatureDim) {
      throw ValidationError("model feature dimension mismatch");
    }
    const auto& w = j.at("weights");
    if (w.size() != kNumActions) throw ValidationError("model must have one row per action");
    QFunction::Weights weights{};
    for (std::size_t a = 0; a < kNumActions; ++a) {
      const auto row = w.at(a).get<std::vector<double>>();
      if (row.size() != kFeatureDim) throw ValidationError("model row has wrong length");
      for (std::size_t i = 0; i < kFeatureDim; ++i) {
        if (!std::isfinite(row[i])) throw ValidationError("model weight is not finite");
        weights[a][i] = row[i];
      }
    }
    m.qf = QFunction(weights);
    if (j.contains("train_config")) m.config = TrainConfig::from_json(j.at("train_config"));
    m.seed = j.value("seed", std::uint64_t{0});
    m.p_x = j.value("p_x", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model file: ") + e.what());
  }
  return m;
}

void save_model(const std::filesystem::path& path, const ModelFile& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path.string());
  out << model_to_json(m).dump(2) << '\n';
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model file: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace cohref
