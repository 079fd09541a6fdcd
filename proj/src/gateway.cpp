#include "arena/gateway.hpp"

#include <cmath>
#include <cstdio>

#include "arena/crypto.hpp"
#include "arena/error.hpp"

namespace arena {

std::string to_string(ParticipationMode mode) { return mode == ParticipationMode::byop ? "byop" : "containerized"; }

ParticipationMode parse_mode(std::string_view text) {
  if (text == "byop") return ParticipationMode::byop;
  if (text == "containerized") return ParticipationMode::containerized;
  throw Error(Errc::InvalidArgument, "unknown participation mode '" + std::string(text) + "'");
}

Gateway::Gateway(const Clock& clock, const Scd2Store& store, Orchestrator& orchestrator, GatewayConfig config)
    : clock_(clock), store_(store), orchestrator_(orchestrator), config_(std::move(config)) {}

std::pair<ModelCard, ApiKey> Gateway::register_model(const ModelCardInput& input) {
  if (input.declared_name_version.empty()) throw Error(Errc::MissingDisclosure, "declared_name_version");
  if (input.architecture_class.empty()) throw Error(Errc::MissingDisclosure, "architecture_class");
  if (input.approx_size.empty()) throw Error(Errc::MissingDisclosure, "approx_size");
  if (!input.external_data_used) throw Error(Errc::MissingDisclosure, "external_data_used");

  std::lock_guard lock(mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "m-%04zu", models_.size() + 1);
  ModelCard card{id,
                 input.declared_name_version,
                 input.architecture_class,
                 input.approx_size,
                 *input.external_data_used,
                 input.mode,
                 clock_.now()};
  ApiKey key{"ak-" + keyed_token(config_.secret, "api-key\x1f" + card.model_id, 32), card.model_id,
             config_.key_rate_limit};
  models_.emplace(card.model_id, card);
  keys_.emplace(key.key, key);
  if (journal_) journal_(Json{{"kind", "model"}, {"card", card}, {"api_key", key.key}});
  return {card, key};
}

std::vector<ModelCard> Gateway::list_models() const {
  std::lock_guard lock(mutex_);
  std::vector<ModelCard> out;
  for (const auto& [id, card] : models_) out.push_back(card);
  return out;
}

ModelCard Gateway::model(const std::string& model_id) const {
  std::lock_guard lock(mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end()) throw Error(Errc::UnknownModel, model_id);
  return it->second;
}

std::optional<ApiKey> Gateway::key_for_model(const std::string& model_id) const {
  std::lock_guard lock(mutex_);
  for (const auto& [k, key] : keys_) {
    if (key.model_id == model_id) return key;
  }
  return std::nullopt;
}

const ApiKey& Gateway::authenticate(const std::string& api_key) const {
  auto it = keys_.find(api_key);
  if (it == keys_.end()) throw Error(Errc::Unauthorized, "unknown API key");
  return it->second;
}

void Gateway::admit_request(const ApiKey& key, Timestamp now) {
  auto& limiter = limiters_[key.key];
  if (!limiter) limiter = std::make_unique<RateLimiter>(key.rate_limit);
  if (!limiter->try_acquire(now)) {
    const auto wait = (limiter->retry_at(now) - now).count();
    throw Error(Errc::RateLimited, "retry after " + std::to_string(wait) + " s");
  }
}

void Gateway::audit(AuditEvent event) {
  event.seq = ++audit_seq_;
  if (journal_) journal_(Json{{"kind", "audit"}, {"event", event}});
  audit_[event.challenge_id].push_back(std::move(event));
}

ChallengeSummary Gateway::summarize(const Challenge& c, Stage stage) const {
  ChallengeSummary s{c.spec, stage, {}, {}};
  for (const auto& a : c.aliases) {
    s.aliases.push_back(a.alias);
    if (a.revealed || stage >= Stage::active) s.revealed.emplace_back(a.alias, store_.series(a.true_series));
  }
  return s;
}

std::vector<ChallengeSummary> Gateway::list_challenges(std::optional<Stage> state, const Scope& scope) const {
  const Timestamp now = clock_.now();
  std::vector<ChallengeSummary> out;
  for (const auto& c : orchestrator_.list()) {
    if (!scope.matches(c.spec.bucket)) continue;
    const Stage stage = orchestrator_.stage_at(c.spec.challenge_id, now);
    if (state && stage != *state) continue;
    out.push_back(summarize(c, stage));
  }
  return out;
}

ChallengeSummary Gateway::challenge(const std::string& challenge_id) const {
  const auto c = orchestrator_.get(challenge_id);
  return summarize(c, orchestrator_.stage_at(challenge_id, clock_.now()));
}

ContextPayload Gateway::get_context(const std::string& api_key, const std::string& challenge_id,
                                    const std::string& alias) {
  std::lock_guard lock(mutex_);
  const ApiKey& key = authenticate(api_key);
  const Timestamp now = clock_.now();
  admit_request(key, now);

  const Challenge c = orchestrator_.get(challenge_id);
  const SeriesAlias* a = c.find_alias(alias);
  if (!a) throw Error(Errc::UnknownAlias, alias);
  const Stage stage = orchestrator_.advance(challenge_id, now).stage;
  if (stage != Stage::registration) throw Error(Errc::NotInRegistration, challenge_id + " is " + to_string(stage));

  const auto& spec = c.spec;
  const auto step = spec.bucket.frequency.step();
  const auto view = store_.as_of(a->true_series, spec.t_p - (spec.context_length - 1) * step, spec.t_p, now);
  ContextPayload payload{challenge_id, alias, spec.bucket.frequency, view.points, now, spec.t_p, spec.horizon_h};
  for (const auto& p : payload.points) {
    if (p.event_time > spec.t_p) throw std::logic_error("context leak: event after t_p");
  }

  Json points = Json::array();
  for (const auto& p : payload.points) points.push_back(Json::array({ts_json(p.event_time), p.value}));
  audit(AuditEvent{0, "context_served", challenge_id, alias, key.model_id, now,
                   Json{{"served_at", ts_json(now)}, {"t_p", ts_json(spec.t_p)}, {"points", points}}});
  return payload;
}

Receipt Gateway::submit_forecast(const std::string& api_key, const std::string& challenge_id, const std::string& alias,
                                 const std::vector<double>& values, Timestamp client_submit_time,
                                 bool external_data_used, const std::optional<std::string>& model_id) {
  std::lock_guard lock(mutex_);
  const ApiKey& key = authenticate(api_key);
  if (model_id && *model_id != key.model_id) throw Error(Errc::Unauthorized, "API key does not belong to " + *model_id);
  // Server-side receipt time; read once, under the admission lock.
  const Timestamp received_at = clock_.now();
  admit_request(key, received_at);

  const Challenge c = orchestrator_.get(challenge_id);
  const SeriesAlias* a = c.find_alias(alias);
  if (!a) throw Error(Errc::UnknownAlias, alias);

  auto reject = [&](Errc code, const std::string& detail) {
    audit(AuditEvent{0, "submission_rejected", challenge_id, alias, key.model_id, received_at,
                     Json{{"error", std::string(to_string(code))},
                          {"detail", detail},
                          {"client_submit_time", ts_json(client_submit_time)},
                          {"received_at", ts_json(received_at)},
                          {"t_p", ts_json(c.spec.t_p)}}});
    return Error(code, detail);
  };

  const Stage stage = orchestrator_.advance(challenge_id, received_at).stage;
  if (received_at > c.spec.t_p) {
    throw reject(Errc::DeadlinePassed, "received " + format_rfc3339(received_at) + " after t_p " +
                                           format_rfc3339(c.spec.t_p));
  }
  if (stage != Stage::registration) throw reject(Errc::NotInRegistration, challenge_id + " is " + to_string(stage));
  if (static_cast<int>(values.size()) != c.spec.horizon_h) {
    throw reject(Errc::WrongLength, "expected " + std::to_string(c.spec.horizon_h) + " values, got " +
                                        std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw reject(Errc::NonFiniteValue, "value " + std::to_string(i) + " is not finite");
  }
  // The looser bound must hold whenever the strict one does.
  if (!(received_at < c.spec.t_p + c.spec.bucket.frequency.step())) {
    throw std::logic_error("admission accepted a submission at or after t_p + step");
  }

  ForecastSubmission sub{challenge_id, alias, key.model_id, values, client_submit_time, received_at, external_data_used};
  submissions_[challenge_id].insert_or_assign(std::make_pair(key.model_id, alias), sub);
  orchestrator_.record_participation(challenge_id, key.model_id, alias);
  if (journal_) journal_(Json{{"kind", "submission"}, {"submission", sub}});
  audit(AuditEvent{0, "submission_accepted", challenge_id, alias, key.model_id, received_at,
                   Json{{"client_submit_time", ts_json(client_submit_time)},
                        {"received_at", ts_json(received_at)},
                        {"t_p", ts_json(c.spec.t_p)},
                        {"external_data_used", external_data_used},
                        {"values", values}}});
  return Receipt{received_at, true};
}

std::vector<AuditEvent> Gateway::audit_trail(const std::string& operator_token, const std::string& challenge_id) const {
  if (!is_operator(operator_token)) throw Error(Errc::Unauthorized, "operator credentials required");
  std::lock_guard lock(mutex_);
  auto it = audit_.find(challenge_id);
  return it == audit_.end() ? std::vector<AuditEvent>{} : it->second;
}

std::vector<ForecastSubmission> Gateway::accepted_submissions(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  std::vector<ForecastSubmission> out;
  auto it = submissions_.find(challenge_id);
  if (it == submissions_.end()) return out;
  for (const auto& [key, sub] : it->second) out.push_back(sub);
  return out;
}

void Gateway::restore(const Json& record) {
  std::lock_guard lock(mutex_);
  const auto kind = record.at("kind").get<std::string>();
  if (kind == "model") {
    auto card = record.at("card").get<ModelCard>();
    keys_.insert_or_assign(record.at("api_key").get<std::string>(),
                           ApiKey{record.at("api_key").get<std::string>(), card.model_id, config_.key_rate_limit});
    models_.insert_or_assign(card.model_id, std::move(card));
  } else if (kind == "submission") {
    const auto& s = record.at("submission");
    ForecastSubmission sub{s.at("challenge_id").get<std::string>(),
                           s.at("series_alias").get<std::string>(),
                           s.at("model_id").get<std::string>(),
                           s.at("values").get<std::vector<double>>(),
                           ts_from(s.at("client_submit_time")),
                           ts_from(s.at("received_at")),
                           s.at("external_data_used").get<bool>()};
    submissions_[sub.challenge_id].insert_or_assign(std::make_pair(sub.model_id, sub.series_alias), sub);
  } else if (kind == "audit") {
    const auto& e = record.at("event");
    AuditEvent ev{e.at("seq").get<std::uint64_t>(),       e.at("kind").get<std::string>(),
                  e.at("challenge_id").get<std::string>(), e.at("series_alias").get<std::string>(),
                  e.at("model_id").get<std::string>(),     ts_from(e.at("server_time")),
                  e.at("details")};
    audit_seq_ = std::max(audit_seq_, ev.seq);
    audit_[ev.challenge_id].push_back(std::move(ev));
  }
}

// --- JSON ------------------------------------------------------------------

void to_json(Json& j, const ModelCard& c) {
  j = Json{{"model_id", c.model_id},
           {"declared_name_version", c.declared_name_version},
           {"architecture_class", c.architecture_class},
           {"approx_size", c.approx_size},
           {"external_data_used", c.external_data_used},
           {"mode", to_string(c.mode)},
           {"registered_at", ts_json(c.registered_at)}};
}

void from_json(const Json& j, ModelCard& c) {
  c.model_id = j.at("model_id").get<std::string>();
  c.declared_name_version = j.at("declared_name_version").get<std::string>();
  c.architecture_class = j.at("architecture_class").get<std::string>();
  c.approx_size = j.at("approx_size").get<std::string>();
  c.external_data_used = j.at("external_data_used").get<bool>();
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.registered_at = ts_from(j.at("registered_at"));
}

void to_json(Json& j, const ContextPayload& p) {
  Json points = Json::array();
  for (const auto& pt : p.points) points.push_back(Json{{"event_time", ts_json(pt.event_time)}, {"value", pt.value}});
  j = Json{{"challenge_id", p.challenge_id},
           {"series_alias", p.series_alias},
           {"frequency", p.frequency},
           {"t_p", ts_json(p.t_p)},
           {"horizon_h", p.horizon_h},
           {"served_at", ts_json(p.served_at)},
           {"points", points}};
}

void from_json(const Json& j, ContextPayload& p) {
  p.challenge_id = j.at("challenge_id").get<std::string>();
  p.series_alias = j.at("series_alias").get<std::string>();
  p.frequency = j.at("frequency").get<Frequency>();
  p.t_p = ts_from(j.at("t_p"));
  p.horizon_h = j.at("horizon_h").get<int>();
  p.served_at = ts_from(j.at("served_at"));
  p.points.clear();
  for (const auto& pt : j.at("points")) p.points.push_back(Point{ts_from(pt.at("event_time")), pt.at("value").get<double>()});
}

void to_json(Json& j, const AuditEvent& e) {
  j = Json{{"seq", e.seq},
           {"kind", e.kind},
           {"challenge_id", e.challenge_id},
           {"series_alias", e.series_alias},
           {"model_id", e.model_id},
           {"server_time", ts_json(e.server_time)},
           {"details", e.details}};
}

void to_json(Json& j, const ChallengeSummary& s) {
  j = Json{{"challenge_id", s.spec.challenge_id},
           {"bucket", s.spec.bucket},
           {"stage", to_string(s.stage)},
           {"t_p", ts_json(s.spec.t_p)},
           {"announce_at", ts_json(s.spec.announce_at)},
           {"registration_open_at", ts_json(s.spec.registration_open_at)},
           {"context_length", s.spec.context_length},
           {"horizon_h", s.spec.horizon_h},
           {"selection", s.spec.selection.random ? "random" : "fixed"},
           {"aliases", s.aliases}};
  if (!s.revealed.empty()) {
    Json series = Json::array();
    for (const auto& [alias, id] : s.revealed) series.push_back(Json{{"alias", alias}, {"series", id}});
    j["series"] = series;
  }
}

void to_json(Json& j, const ForecastSubmission& s) {
  j = Json{{"challenge_id", s.challenge_id},
           {"series_alias", s.series_alias},
           {"model_id", s.model_id},
           {"values", s.values},
           {"client_submit_time", ts_json(s.client_submit_time)},
           {"received_at", ts_json(s.received_at)},
           {"external_data_used", s.external_data_used}};
}

}  // namespace arena
