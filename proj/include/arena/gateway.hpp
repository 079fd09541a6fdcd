#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "arena/clock.hpp"
#include "arena/ingestion.hpp"
#include "arena/json_io.hpp"
#include "arena/orchestrator.hpp"
#include "arena/scd2_store.hpp"

namespace arena {

enum class ParticipationMode { containerized, byop };
std::string to_string(ParticipationMode mode);
ParticipationMode parse_mode(std::string_view text);

/// Disclosure fields supplied at registration.
struct ModelCardInput {
  std::string declared_name_version;
  std::string architecture_class;
  std::string approx_size;
  std::optional<bool> external_data_used;
  ParticipationMode mode = ParticipationMode::byop;
};

struct ModelCard {
  std::string model_id;
  std::string declared_name_version;
  std::string architecture_class;
  std::string approx_size;
  bool external_data_used = false;
  ParticipationMode mode = ParticipationMode::byop;
  Timestamp registered_at;

  bool operator==(const ModelCard&) const = default;
};

struct ApiKey {
  std::string key;
  std::string model_id;
  RateLimit rate_limit;
};

struct ContextPayload {
  std::string challenge_id;
  std::string series_alias;
  Frequency frequency;
  std::vector<Point> points;
  Timestamp served_at;
  Timestamp t_p;
  int horizon_h = 1;

  ContextWindow window() const { return ContextWindow{t_p, frequency, points}; }
};

struct ForecastSubmission {
  std::string challenge_id;
  std::string series_alias;
  std::string model_id;
  std::vector<double> values;
  Timestamp client_submit_time;
  Timestamp received_at;
  bool external_data_used = false;
};

struct Receipt {
  Timestamp received_at;
  bool accepted = true;
};

struct AuditEvent {
  std::uint64_t seq = 0;
  std::string kind;  // context_served | submission_accepted | submission_rejected
  std::string challenge_id;
  std::string series_alias;
  std::string model_id;
  Timestamp server_time;
  Json details;
};

struct ChallengeSummary {
  ChallengeSpec spec;
  Stage stage = Stage::announced;
  std::vector<std::string> aliases;
  // Present only for aliases whose identity has been revealed.
  std::vector<std::pair<std::string, SeriesId>> revealed;
};

struct GatewayConfig {
  std::string secret = "arena-secret";
  std::string operator_token = "operator";
  RateLimit key_rate_limit{60, Duration{60}};
};

/// Public surface of the platform: model registry, context serving and
/// forecast admission. The injected clock is the only source of served_at
/// and received_at; clock read and admission decision happen under one lock.
class Gateway {
 public:
  Gateway(const Clock& clock, const Scd2Store& store, Orchestrator& orchestrator, GatewayConfig config);

  // Throws MissingDisclosure naming the first empty field.
  std::pair<ModelCard, ApiKey> register_model(const ModelCardInput& input);
  std::vector<ModelCard> list_models() const;
  ModelCard model(const std::string& model_id) const;
  std::optional<ApiKey> key_for_model(const std::string& model_id) const;

  std::vector<ChallengeSummary> list_challenges(std::optional<Stage> state, const Scope& scope) const;
  ChallengeSummary challenge(const std::string& challenge_id) const;

  ContextPayload get_context(const std::string& api_key, const std::string& challenge_id, const std::string& alias);

  Receipt submit_forecast(const std::string& api_key, const std::string& challenge_id, const std::string& alias,
                          const std::vector<double>& values, Timestamp client_submit_time, bool external_data_used,
                          const std::optional<std::string>& model_id = std::nullopt);

  std::vector<AuditEvent> audit_trail(const std::string& operator_token, const std::string& challenge_id) const;

  // Accepted submission per (model, alias), latest wins.
  std::vector<ForecastSubmission> accepted_submissions(const std::string& challenge_id) const;

  bool is_operator(const std::string& token) const { return token == config_.operator_token; }
  const Clock& clock() const { return clock_; }

  // Journal hooks.
  void set_journal(std::function<void(const Json&)> sink) { journal_ = std::move(sink); }
  void restore(const Json& record);

 private:
  const ApiKey& authenticate(const std::string& api_key) const;
  void admit_request(const ApiKey& key, Timestamp now);
  void audit(AuditEvent event);
  ChallengeSummary summarize(const Challenge& c, Stage stage) const;

  const Clock& clock_;
  const Scd2Store& store_;
  Orchestrator& orchestrator_;
  GatewayConfig config_;

  mutable std::mutex mutex_;
  std::map<std::string, ModelCard> models_;
  std::map<std::string, ApiKey> keys_;  // key -> ApiKey
  std::map<std::string, std::unique_ptr<RateLimiter>> limiters_;
  // challenge -> (model, alias) -> submission
  std::map<std::string, std::map<std::pair<std::string, std::string>, ForecastSubmission>> submissions_;
  std::map<std::string, std::vector<AuditEvent>> audit_;
  std::uint64_t audit_seq_ = 0;
  std::function<void(const Json&)> journal_;
};

void to_json(Json& j, const ModelCard& c);
void from_json(const Json& j, ModelCard& c);
void to_json(Json& j, const ContextPayload& p);
void from_json(const Json& j, ContextPayload& p);
void to_json(Json& j, const AuditEvent& e);
void to_json(Json& j, const ChallengeSummary& s);
void to_json(Json& j, const ForecastSubmission& s);

}  // namespace arena
