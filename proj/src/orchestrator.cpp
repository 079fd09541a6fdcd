#include "arena/orchestrator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <random>

#include "arena/crypto.hpp"
#include "arena/error.hpp"
#include "arena/synthetic.hpp"

namespace arena {

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::announced: return "announced";
    case Stage::registration: return "registration";
    case Stage::active: return "active";
    case Stage::closed: return "closed";
  }
  return "unknown";
}

Stage parse_stage(std::string_view text) {
  if (text == "announced") return Stage::announced;
  if (text == "registration") return Stage::registration;
  if (text == "active") return Stage::active;
  if (text == "closed") return Stage::closed;
  throw Error(Errc::InvalidArgument, "unknown stage '" + std::string(text) + "'");
}

const SeriesAlias* Challenge::find_alias(std::string_view alias) const {
  auto it = std::find_if(aliases.begin(), aliases.end(), [&](const SeriesAlias& a) { return a.alias == alias; });
  return it == aliases.end() ? nullptr : &*it;
}

void validate(const ChallengeSpec& spec) {
  if (!(spec.announce_at <= spec.registration_open_at && spec.registration_open_at < spec.t_p)) {
    throw Error(Errc::InvalidArgument, spec.challenge_id + ": need announce_at <= registration_open_at < t_p");
  }
  if (spec.horizon_h != horizon_steps(spec.bucket.horizon, spec.bucket.frequency)) {
    throw Error(Errc::InvalidArgument, spec.challenge_id + ": horizon_h disagrees with the bucket");
  }
  if (spec.context_length < 1) throw Error(Errc::InvalidArgument, spec.challenge_id + ": context_length must be >= 1");
  if (!on_grid(spec.t_p, spec.bucket.frequency)) {
    throw Error(Errc::OffGrid, spec.challenge_id + ": t_p is not on the bucket grid");
  }
  if (spec.selection.random ? spec.selection.k < 1 : spec.selection.fixed_series.empty()) {
    throw Error(Errc::InvalidArgument, spec.challenge_id + ": empty selection");
  }
}

std::vector<std::string> validate(const ScheduleConfig& config) {
  std::vector<std::string> warnings;
  for (const auto& b : config.buckets) {
    const auto label = b.bucket.label();
    horizon_steps(b.bucket.horizon, b.bucket.frequency);
    if (b.cadence_per_day < 1 || 86400 % b.cadence_per_day != 0) {
      throw Error(Errc::InvalidArgument, label + ": cadence must divide the day evenly");
    }
    const long long spacing = 86400 / b.cadence_per_day;
    const long long step = b.bucket.frequency.step().count();
    if (spacing % step != 0 || b.phase_offset.count() % step != 0) {
      throw Error(Errc::OffGrid, label + ": cut points must fall on the frequency grid");
    }
    if (b.registration_window.count() <= 0 || b.announce_lead.count() < 0) {
      throw Error(Errc::InvalidArgument, label + ": registration window must be positive");
    }
    if (b.context_length < 1 || b.grace_steps < 0) throw Error(Errc::InvalidArgument, label + ": bad context/grace");
    if (b.fixed_series.empty() && b.k < 1) throw Error(Errc::InvalidArgument, label + ": k must be >= 1");
    if (step < 900) {
      warnings.push_back(label + ": frequency below 15 minutes is feasible only if model inference is faster than " +
                         b.bucket.frequency.iso());
    }
  }
  return warnings;
}

std::string challenge_id_for(const BucketKey& bucket, Timestamp t_p) {
  // 2025-12-14T11:00:00Z -> 20251214T1100Z
  std::string stamp;
  for (char c : format_rfc3339(t_p).substr(0, 16)) {
    if (c != '-' && c != ':') stamp.push_back(c);
  }
  return bucket.domain + "-" + bucket.frequency.iso() + "-" + format_iso_duration(bucket.horizon) + "-" + stamp + "Z";
}

std::vector<ChallengeSpec> plan_bucket(const BucketSchedule& schedule, const ScheduleConfig& config, Timestamp now,
                                       const EligibleFn& eligible) {
  const long long spacing = 86400 / schedule.cadence_per_day;
  const Timestamp last = now + config.planning_horizon;
  const Timestamp day0 = from_unix((to_unix(now) / 86400 - 1) * 86400);

  std::vector<ChallengeSpec> out;
  for (Timestamp day = day0; day <= last; day += Duration{86400}) {
    for (int i = 0; i < schedule.cadence_per_day; ++i) {
      const Timestamp t_p = day + schedule.phase_offset + Duration{i * spacing};
      if (t_p <= now || t_p > last) continue;
      if (config.not_before && t_p < *config.not_before) continue;
      if (config.not_after && t_p >= *config.not_after) continue;
      ChallengeSpec spec;
      spec.challenge_id = challenge_id_for(schedule.bucket, t_p);
      spec.bucket = schedule.bucket;
      spec.t_p = t_p;
      spec.context_length = schedule.context_length;
      spec.horizon_h = horizon_steps(schedule.bucket.horizon, schedule.bucket.frequency);
      spec.registration_open_at = t_p - schedule.registration_window;
      spec.announce_at = spec.registration_open_at - schedule.announce_lead;
      spec.grace = schedule.grace_steps * schedule.bucket.frequency.step();
      spec.selection.random = schedule.fixed_series.empty();
      spec.selection.fixed_series = schedule.fixed_series;
      spec.selection.k = spec.selection.random ? schedule.k : static_cast<int>(schedule.fixed_series.size());
      spec.selection.seed = substream_seed(schedule.seed, spec.challenge_id);
      out.push_back(std::move(spec));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t_p < b.t_p; });
  if (!out.empty() && schedule.fixed_series.empty()) {
    const auto n = eligible(schedule.bucket).size();
    if (n < static_cast<std::size_t>(schedule.k)) {
      throw Error(Errc::NoEligibleSeries, schedule.bucket.label() + " has " + std::to_string(n) +
                                              " fresh series, needs " + std::to_string(schedule.k));
    }
  }
  return out;
}

std::vector<ChallengeSpec> plan_challenges(const ScheduleConfig& config, Timestamp now, const EligibleFn& eligible) {
  std::vector<ChallengeSpec> out;
  for (const auto& b : config.buckets) {
    auto specs = plan_bucket(b, config, now, eligible);
    out.insert(out.end(), specs.begin(), specs.end());
  }
  return out;
}

std::string make_alias(const std::string& secret, const std::string& challenge_id, const std::string& series_key) {
  return "s-" + keyed_token(secret, challenge_id + '\x1f' + series_key, 16);
}

std::vector<SeriesAlias> sample_random(const BucketKey& bucket, int k, std::uint64_t seed,
                                       std::vector<SeriesId> eligible, const std::string& challenge_id,
                                       const std::string& secret) {
  if (k < 1 || eligible.size() < static_cast<std::size_t>(k)) {
    throw Error(Errc::InsufficientEligible, bucket.label() + ": " + std::to_string(eligible.size()) +
                                                " eligible, k=" + std::to_string(k));
  }
  std::sort(eligible.begin(), eligible.end(), [](const SeriesId& a, const SeriesId& b) { return a.key() < b.key(); });
  std::mt19937_64 rng(seed);
  const std::size_t n = eligible.size();
  std::vector<SeriesAlias> out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    // Unbiased draw from [0, n - i) by rejection.
    const std::uint64_t range = n - i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(eligible[i], eligible[i + r % range]);
    const auto key = eligible[i].key();
    out.push_back(SeriesAlias{challenge_id, make_alias(secret, challenge_id, key), key, false});
  }
  return out;
}

// --- Orchestrator ----------------------------------------------------------

Orchestrator::Orchestrator(const Scd2Store& store, const Ingestor& ingestor, ScheduleConfig config, std::string secret)
    : store_(store), ingestor_(ingestor), config_(std::move(config)), secret_(std::move(secret)) {
  for (const auto& w : validate(config_)) spdlog::warn("schedule: {}", w);
}

EligibleFn Orchestrator::eligible_fn(Timestamp now) const {
  return [this, now](const BucketKey& bucket) {
    std::vector<SeriesId> out;
    for (const auto& s : store_.list_series()) {
      if (s.domain != bucket.domain || s.native_frequency != bucket.frequency) continue;
      if (!ingestor_.check_freshness(s.key(), now).stale) out.push_back(s);
    }
    return out;
  };
}

std::vector<ChallengeSpec> Orchestrator::plan(Timestamp now) {
  std::vector<ChallengeSpec> created;
  const auto eligible = eligible_fn(now);
  for (const auto& b : config_.buckets) {
    std::vector<ChallengeSpec> specs;
    try {
      specs = plan_bucket(b, config_, now, eligible);
    } catch (const Error& e) {
      if (e.code() != Errc::NoEligibleSeries) throw;
      spdlog::warn("planning skipped: {}", e.what());
      continue;
    }
    for (auto& spec : specs) {
      if (contains(spec.challenge_id)) continue;
      try {
        create(spec, now);
        created.push_back(std::move(spec));
      } catch (const Error& e) {
        spdlog::warn("challenge {} not created: {}", spec.challenge_id, e.what());
      }
    }
  }
  return created;
}

const Challenge& Orchestrator::create(ChallengeSpec spec, Timestamp now) {
  validate(spec);
  Challenge c;
  if (spec.selection.random) {
    c.aliases = sample_random(spec.bucket, spec.selection.k, spec.selection.seed, eligible_fn(now)(spec.bucket),
                              spec.challenge_id, secret_);
  } else {
    for (const auto& key : spec.selection.fixed_series) {
      store_.series(key);  // throws UnknownSeries
      // Named series are public from the start.
      c.aliases.push_back(SeriesAlias{spec.challenge_id, make_alias(secret_, spec.challenge_id, key), key, true});
    }
  }
  c.spec = std::move(spec);
  std::lock_guard lock(mutex_);
  auto [it, fresh] = challenges_.emplace(c.spec.challenge_id, std::move(c));
  if (!fresh) throw Error(Errc::InvalidArgument, "duplicate challenge " + it->first);
  // Persisted before anyone can observe it.
  if (on_create_) on_create_(it->second);
  return it->second;
}

Challenge& Orchestrator::at(const std::string& challenge_id) {
  auto it = challenges_.find(challenge_id);
  if (it == challenges_.end()) throw Error(Errc::UnknownChallenge, challenge_id);
  return it->second;
}

const Challenge& Orchestrator::at(const std::string& challenge_id) const {
  auto it = challenges_.find(challenge_id);
  if (it == challenges_.end()) throw Error(Errc::UnknownChallenge, challenge_id);
  return it->second;
}

Stage Orchestrator::implied_stage(const Challenge& c, Timestamp now) const {
  const auto& s = c.spec;
  Stage stage;
  if (now < s.registration_open_at) {
    stage = Stage::announced;
  } else if (now <= s.t_p) {
    stage = Stage::registration;
  } else {
    const Timestamp last = s.last_horizon_point();
    bool complete = now >= last;
    if (complete) {
      for (const auto& a : c.aliases) {
        const auto view = store_.as_of(a.true_series, s.t_p + s.bucket.frequency.step(), last, now);
        if (static_cast<int>(view.points.size()) < s.horizon_h) {
          complete = false;
          break;
        }
      }
    }
    stage = (complete || now > last + s.grace) ? Stage::closed : Stage::active;
  }
  return std::max(stage, c.state.stage);
}

Stage Orchestrator::stage_at(const std::string& challenge_id, Timestamp now) const {
  std::lock_guard lock(mutex_);
  return implied_stage(at(challenge_id), now);
}

void Orchestrator::apply(Challenge& c, Stage stage, Timestamp now) {
  if (stage <= c.state.stage && !(stage >= Stage::active && !c.state.reveal_done)) return;
  c.state.stage = std::max(c.state.stage, stage);
  if (c.state.stage >= Stage::active && !c.state.reveal_done) {
    for (auto& a : c.aliases) a.revealed = true;
    c.state.reveal_done = true;
  }
  if (c.state.stage == Stage::closed && !c.state.closed_at) c.state.closed_at = now;
}

ChallengeState Orchestrator::advance(const std::string& challenge_id, Timestamp now) {
  std::lock_guard lock(mutex_);
  auto& c = at(challenge_id);
  const Stage from = c.state.stage;
  apply(c, implied_stage(c, now), now);
  if (c.state.stage != from && on_transition_) on_transition_(c);
  return c.state;
}

std::vector<Transition> Orchestrator::tick(Timestamp now) {
  std::lock_guard lock(mutex_);
  std::vector<Transition> out;
  for (auto& [id, c] : challenges_) {
    if (c.state.stage == Stage::closed) continue;
    const Stage from = c.state.stage;
    apply(c, implied_stage(c, now), now);
    if (c.state.stage != from) {
      out.push_back(Transition{id, from, c.state.stage});
      if (on_transition_) on_transition_(c);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> Orchestrator::reveal(const std::string& challenge_id) {
  std::lock_guard lock(mutex_);
  const auto& c = at(challenge_id);
  if (c.state.stage < Stage::active) throw Error(Errc::StillInRegistration, challenge_id);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : c.aliases) out.emplace_back(a.alias, a.true_series);
  return out;
}

void Orchestrator::record_participation(const std::string& challenge_id, const std::string& model_id,
                                        const std::string& alias) {
  std::lock_guard lock(mutex_);
  at(challenge_id).state.participants.emplace(model_id, alias);
}

Challenge Orchestrator::get(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  return at(challenge_id);
}

std::vector<Challenge> Orchestrator::list() const {
  std::lock_guard lock(mutex_);
  std::vector<Challenge> out;
  out.reserve(challenges_.size());
  for (const auto& [id, c] : challenges_) out.push_back(c);
  return out;
}

bool Orchestrator::contains(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  return challenges_.contains(challenge_id);
}

void Orchestrator::restore(Challenge challenge) {
  std::lock_guard lock(mutex_);
  challenges_.insert_or_assign(challenge.spec.challenge_id, std::move(challenge));
}

void Orchestrator::restore_stage(const std::string& challenge_id, Stage stage, std::optional<Timestamp> closed_at) {
  std::lock_guard lock(mutex_);
  auto& c = at(challenge_id);
  apply(c, stage, closed_at.value_or(c.spec.t_p));
  if (closed_at) c.state.closed_at = closed_at;
}

// --- JSON ------------------------------------------------------------------

void to_json(Json& j, const ChallengeSpec& s) {
  Json selection{{"mode", s.selection.random ? "random" : "fixed"}, {"k", s.selection.k}};
  if (s.selection.random) {
    selection["seed"] = s.selection.seed;
  } else {
    selection["series"] = s.selection.fixed_series;
  }
  j = Json{{"challenge_id", s.challenge_id},
           {"bucket", s.bucket},
           {"t_p", ts_json(s.t_p)},
           {"context_length", s.context_length},
           {"horizon_h", s.horizon_h},
           {"selection", selection},
           {"announce_at", ts_json(s.announce_at)},
           {"registration_open_at", ts_json(s.registration_open_at)},
           {"grace", dur_json(s.grace)}};
}

void from_json(const Json& j, ChallengeSpec& s) {
  s.challenge_id = j.at("challenge_id").get<std::string>();
  s.bucket = j.at("bucket").get<BucketKey>();
  s.t_p = ts_from(j.at("t_p"));
  s.context_length = j.at("context_length").get<int>();
  s.horizon_h = j.at("horizon_h").get<int>();
  const auto& sel = j.at("selection");
  s.selection.random = sel.at("mode").get<std::string>() == "random";
  s.selection.k = sel.at("k").get<int>();
  s.selection.seed = sel.value("seed", std::uint64_t{0});
  s.selection.fixed_series = sel.value("series", std::vector<std::string>{});
  s.announce_at = ts_from(j.at("announce_at"));
  s.registration_open_at = ts_from(j.at("registration_open_at"));
  s.grace = dur_from(j.at("grace"));
}

void to_json(Json& j, const SeriesAlias& a) {
  j = Json{{"challenge_id", a.challenge_id}, {"alias", a.alias}, {"true_series", a.true_series}, {"revealed", a.revealed}};
}

void from_json(const Json& j, SeriesAlias& a) {
  a.challenge_id = j.at("challenge_id").get<std::string>();
  a.alias = j.at("alias").get<std::string>();
  a.true_series = j.at("true_series").get<std::string>();
  a.revealed = j.at("revealed").get<bool>();
}

}  // namespace arena
