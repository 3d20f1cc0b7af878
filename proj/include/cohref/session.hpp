#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cohref/dialogue.hpp"
#include "cohref/simulator.hpp"

namespace cohref {

inline constexpr std::size_t kMaxUtteranceLength = 500;

enum class SessionStatus { Open, Selected, Timeout };
std::string to_string(SessionStatus s);

struct TranscriptEntry {
  Speaker speaker = Speaker::Director;
  std::string text;
};

nlohmann::json context_to_wire(const DisplayContext& ctx);
// Accepts {"patches": [{"hue", "sat", "light"} x3], "target"?}.
DisplayContext context_from_wire(const nlohmann::json& j);

// One live game. The matcher only ever sees the context without its target.
class Session {
 public:
  Session(std::string id, DisplayContext context, const ColorSemantics& semantics,
          const Pcfg& pcfg, std::unique_ptr<Policy> policy);

  // Throws SessionError when the game is over or the utterance is too long.
  MatcherReply step(std::string_view utterance);
  MatcherReply force_select();

  const std::string& id() const { return id_; }
  const DisplayContext& context() const { return context_; }
  SessionStatus status() const { return status_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  const Matcher& matcher() const { return matcher_; }
  std::string policy_name() const { return policy_->name(); }
  std::string outcome() const;

 private:
  MatcherReply finish(MatcherReply r);

  std::string id_;
  DisplayContext context_;
  std::unique_ptr<Policy> policy_;
  Matcher matcher_;
  SessionStatus status_ = SessionStatus::Open;
  std::vector<TranscriptEntry> transcript_;
};

struct TrialRecord {
  std::string session_id;
  DisplayContext context;
  std::string policy;
  std::vector<TranscriptEntry> transcript;
  std::string outcome;
  std::optional<int> rating;
  std::string feedback;

  void validate() const;
  nlohmann::json to_json() const;
  static TrialRecord from_json(const nlohmann::json& j);
};

TrialRecord make_trial_record(const Session& s, std::optional<int> rating, std::string feedback);

// Appends one JSON object per line.
void append_trial_record(const std::filesystem::path& path, const TrialRecord& r);
std::vector<TrialRecord> load_trial_records(const std::filesystem::path& path);

// Feeds the recorded director turns to a fresh session and returns the
// matcher's replies in order. A "[select]" director entry stands for a
// forced selection.
std::vector<std::string> replay_transcript(const TrialRecord& r, const ColorSemantics& semantics,
                                           const Pcfg& pcfg, std::unique_ptr<Policy> policy);

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

struct ServiceConfig {
  std::uint64_t seed = 1;
  ContextMode mode = ContextMode::Mixed;
  std::optional<std::filesystem::path> records;
};

// Routes wire messages to sessions. Shared artifacts are read-only; each
// session is guarded by its own lock.
class SessionManager {
 public:
  SessionManager(const ColorSemantics& semantics, const Pcfg& pcfg, PolicyFactory policies,
                 ServiceConfig config);

  // {type, session, payload} in; {ok: true, ...} or {ok: false, error} out.
  nlohmann::json handle(const nlohmann::json& message);

  std::size_t session_count() const;

 private:
  struct Slot {
    std::mutex mu;
    std::unique_ptr<Session> session;
    bool rated = false;
  };

  nlohmann::json create(const nlohmann::json& payload);
  nlohmann::json utterance(Slot& slot, const nlohmann::json& payload);
  nlohmann::json select(Slot& slot);
  nlohmann::json rate(Slot& slot, const nlohmann::json& payload);
  std::shared_ptr<Slot> find(const std::string& id) const;

  const ColorSemantics& semantics_;
  const Pcfg& pcfg_;
  PolicyFactory policies_;
  ServiceConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t created_ = 0;
  std::mutex records_mu_;
};

}  // namespace cohref
