#include "cohref/session.hpp"

#include <fstream>

#include "cohref/errors.hpp"

namespace cohref {

namespace {

constexpr std::string_view kForcedSelect = "[select]";
constexpr std::uint64_t kSessionContexts = 7;

}  // namespace

std::string to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Open: return "open";
    case SessionStatus::Selected: return "selected";
    case SessionStatus::Timeout: return "timeout";
  }
  return "?";
}

nlohmann::json context_to_wire(const DisplayContext& ctx) {
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& p : ctx.patches) {
    patches.push_back({{"hue", p.hue}, {"sat", p.sat}, {"light", p.light}});
  }
  nlohmann::json j{{"patches", patches}};
  if (ctx.target) j["target"] = *ctx.target;
  return j;
}

DisplayContext context_from_wire(const nlohmann::json& j) {
  try {
    const auto& ps = j.at("patches");
    if (!ps.is_array() || ps.size() != kNumPatches) {
      throw ValidationError("a context needs exactly 3 patches");
    }
    std::array<ColorPatch, kNumPatches> patches;
    for (std::size_t i = 0; i < kNumPatches; ++i) {
      const auto& p = ps[i];
      patches[i] = ColorPatch(p.at("hue").get<double>(), p.at("sat").get<double>(),
                              p.at("light").get<double>());
    }
    std::optional<std::size_t> target;
    if (j.contains("target") && !j.at("target").is_null()) {
      const auto t = j.at("target").get<long long>();
      if (t < 0 || t >= static_cast<long long>(kNumPatches)) {
        throw ValidationError("target index out of range");
      }
      target = static_cast<std::size_t>(t);
    }
    return DisplayContext(patches, target);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed context: ") + e.what());
  }
}

Session::Session(std::string id, DisplayContext context, const ColorSemantics& semantics,
                 const Pcfg& pcfg, std::unique_ptr<Policy> policy)
    : id_(std::move(id)),
      context_(std::move(context)),
      policy_(std::move(policy)),
      matcher_(semantics, pcfg, *policy_, context_) {}

MatcherReply Session::finish(MatcherReply r) {
  transcript_.push_back({Speaker::Matcher, r.text});
  if (r.kind == ReplyKind::Select) status_ = SessionStatus::Selected;
  if (r.kind == ReplyKind::Timeout) status_ = SessionStatus::Timeout;
  return r;
}

MatcherReply Session::step(std::string_view utterance) {
  if (status_ != SessionStatus::Open) throw SessionError("session " + id_ + " is closed");
  if (utterance.size() > kMaxUtteranceLength) {
    throw SessionError("utterance longer than " + std::to_string(kMaxUtteranceLength) +
                       " characters");
  }
  transcript_.push_back({Speaker::Director, std::string(utterance)});
  return finish(matcher_.hear(utterance));
}

MatcherReply Session::force_select() {
  if (status_ != SessionStatus::Open) throw SessionError("session " + id_ + " is closed");
  transcript_.push_back({Speaker::Director, std::string(kForcedSelect)});
  return finish(matcher_.select_now());
}

std::string Session::outcome() const {
  switch (status_) {
    case SessionStatus::Open: return "open";
    case SessionStatus::Timeout: return "timeout";
    case SessionStatus::Selected: break;
  }
  const auto chosen = matcher_.graph().selected_patch();
  if (!context_.target || !chosen) return "selected";
  return *chosen == *context_.target ? "success" : "failure";
}

void TrialRecord::validate() const {
  if (rating && (*rating < 0 || *rating > 5)) throw ValidationError("rating must be 0 to 5");
}

nlohmann::json TrialRecord::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& e : transcript) t.push_back({{"speaker", to_string(e.speaker)}, {"text", e.text}});
  return {{"session", session_id},
          {"context", context_to_wire(context)},
          {"policy", policy},
          {"transcript", t},
          {"outcome", outcome},
          {"rating", rating ? nlohmann::json(*rating) : nlohmann::json()},
          {"feedback", feedback}};
}

TrialRecord TrialRecord::from_json(const nlohmann::json& j) {
  TrialRecord r;
  try {
    r.session_id = j.at("session").get<std::string>();
    r.context = context_from_wire(j.at("context"));
    r.policy = j.value("policy", std::string());
    for (const auto& e : j.at("transcript")) {
      const auto who = e.at("speaker").get<std::string>();
      r.transcript.push_back(
          {who == "matcher" ? Speaker::Matcher : Speaker::Director, e.at("text").get<std::string>()});
    }
    r.outcome = j.value("outcome", std::string());
    if (j.contains("rating") && !j.at("rating").is_null()) r.rating = j.at("rating").get<int>();
    r.feedback = j.value("feedback", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad trial record: ") + e.what());
  }
  r.validate();
  return r;
}

TrialRecord make_trial_record(const Session& s, std::optional<int> rating, std::string feedback) {
  TrialRecord r{s.id(), s.context(), s.policy_name(), s.transcript(), s.outcome(), rating,
                std::move(feedback)};
  r.validate();
  return r;
}

void append_trial_record(const std::filesystem::path& path, const TrialRecord& r) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot append to " + path.string());
  out << r.to_json().dump() << '\n';
}

std::vector<TrialRecord> load_trial_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(TrialRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), lineno);
    }
  }
  return out;
}

std::vector<std::string> replay_transcript(const TrialRecord& r, const ColorSemantics& semantics,
                                           const Pcfg& pcfg, std::unique_ptr<Policy> policy) {
  Session s(r.session_id, r.context, semantics, pcfg, std::move(policy));
  std::vector<std::string> replies;
  for (const auto& e : r.transcript) {
    if (e.speaker != Speaker::Director) continue;
    if (s.status() != SessionStatus::Open) break;
    const MatcherReply reply = e.text == kForcedSelect ? s.force_select() : s.step(e.text);
    replies.push_back(reply.text);
  }
  return replies;
}

SessionManager::SessionManager(const ColorSemantics& semantics, const Pcfg& pcfg,
                               PolicyFactory policies, ServiceConfig config)
    : semantics_(semantics), pcfg_(pcfg), policies_(std::move(policies)), config_(std::move(config)) {
  if (!policies_) throw ValidationError("a policy factory is required");
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::shared_ptr<SessionManager::Slot> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError("unknown session '" + id + "'");
  return it->second;
}

namespace {

nlohmann::json error_reply(const std::string& what) { return {{"ok", false}, {"error", what}}; }

}  // namespace

nlohmann::json SessionManager::handle(const nlohmann::json& message) {
  try {
    if (!message.is_object()) throw ValidationError("message must be a JSON object");
    const auto type = message.value("type", std::string());
    const nlohmann::json payload = message.value("payload", nlohmann::json::object());
    if (!payload.is_object()) throw ValidationError("payload must be an object");
    if (type == "create") return create(payload);
    if (type != "utterance" && type != "reply" && type != "select" && type != "rate") {
      throw ValidationError("unknown message type '" + type + "'");
    }
    if (!message.contains("session") || !message.at("session").is_string()) {
      throw ValidationError("message needs a session id");
    }
    auto slot = find(message.at("session").get<std::string>());
    std::lock_guard lock(slot->mu);
    if (type == "select") return select(*slot);
    if (type == "rate") return rate(*slot, payload);
    return utterance(*slot, payload);
  } catch (const Error& e) {
    return error_reply(e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(std::string("malformed message: ") + e.what());
  }
}

nlohmann::json SessionManager::create(const nlohmann::json& payload) {
  std::uint64_t index = 0;
  {
    std::lock_guard lock(mu_);
    index = ++created_;
  }
  DisplayContext ctx;
  if (payload.contains("patches")) {
    ctx = context_from_wire(payload);
    if (!ctx.target) throw ValidationError("a supplied context needs a target");
  } else {
    const ContextMode mode = payload.contains("context_mode")
                                 ? context_mode_from_string(payload.at("context_mode"))
                                 : config_.mode;
    Rng rng = stream_rng(config_.seed, kSessionContexts, index);
    ctx = sample_context(rng, mode);
  }
  const std::string id = "s" + std::to_string(index);
  auto slot = std::make_shared<Slot>();
  slot->session = std::make_unique<Session>(id, ctx, semantics_, pcfg_, policies_());
  {
    std::lock_guard lock(mu_);
    sessions_.emplace(id, slot);
  }
  nlohmann::json wire = context_to_wire(ctx.without_target());
  return {{"ok", true},
          {"type", "created"},
          {"session", id},
          {"patches", wire.at("patches")},
          {"director", {{"target", *ctx.target}}}};
}

namespace {

nlohmann::json reply_message(const Session& s, const MatcherReply& r) {
  nlohmann::json j{{"ok", true},
                   {"type", "reply"},
                   {"session", s.id()},
                   {"reply", r.to_json()},
                   {"status", to_string(s.status())}};
  if (r.kind == ReplyKind::Select) {
    j["selected"] = *r.patch;
    j["correct"] = s.context().target && *r.patch == *s.context().target;
  }
  return j;
}

}  // namespace

nlohmann::json SessionManager::utterance(Slot& slot, const nlohmann::json& payload) {
  const auto& text = payload.at("text");
  if (!text.is_string()) throw ValidationError("utterance text must be a string");
  const MatcherReply r = slot.session->step(text.get<std::string>());
  if (config_.records && slot.session->status() != SessionStatus::Open) {
    std::lock_guard lock(records_mu_);
    append_trial_record(*config_.records, make_trial_record(*slot.session, std::nullopt, ""));
  }
  return reply_message(*slot.session, r);
}

nlohmann::json SessionManager::select(Slot& slot) {
  const MatcherReply r = slot.session->force_select();
  if (config_.records) {
    std::lock_guard lock(records_mu_);
    append_trial_record(*config_.records, make_trial_record(*slot.session, std::nullopt, ""));
  }
  return reply_message(*slot.session, r);
}

nlohmann::json SessionManager::rate(Slot& slot, const nlohmann::json& payload) {
  const auto& rating = payload.at("rating");
  if (!rating.is_number_integer()) throw ValidationError("rating must be an integer");
  const auto value = rating.get<long long>();
  if (value < 0 || value > 5) throw ValidationError("rating must be 0 to 5");
  if (slot.session->status() == SessionStatus::Open) {
    throw SessionError("the game has not finished yet");
  }
  if (slot.rated) throw SessionError("session already rated");
  const auto feedback = payload.value("feedback", std::string());
  const TrialRecord record = make_trial_record(*slot.session, static_cast<int>(value), feedback);
  if (config_.records) {
    std::lock_guard lock(records_mu_);
    append_trial_record(*config_.records, record);
  }
  slot.rated = true;
  return {{"ok", true}, {"type", "rated"}, {"session", slot.session->id()}, {"record", record.to_json()}};
}

}  // namespace cohref
