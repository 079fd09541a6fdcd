#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arena/domain.hpp"
#include "arena/ingestion.hpp"
#include "arena/json_io.hpp"
#include "arena/scd2_store.hpp"

namespace arena {

enum class Stage { announced = 0, registration = 1, active = 2, closed = 3 };
std::string to_string(Stage stage);
Stage parse_stage(std::string_view text);

struct Selection {
  bool random = true;
  std::vector<std::string> fixed_series;  // series keys, fixed selection only
  int k = 10;
  std::uint64_t seed = 0;
};

struct ChallengeSpec {
  std::string challenge_id;
  BucketKey bucket;
  Timestamp t_p;
  int context_length = 1;
  int horizon_h = 1;
  Selection selection;
  Timestamp announce_at;
  Timestamp registration_open_at;
  Duration grace{0};

  Timestamp last_horizon_point() const { return t_p + horizon_h * bucket.frequency.step(); }
};

// Throws InvalidArgument on a violated ChallengeSpec invariant.
void validate(const ChallengeSpec& spec);

struct SeriesAlias {
  std::string challenge_id;
  std::string alias;
  std::string true_series;  // SeriesId::key()
  bool revealed = false;
};

struct ChallengeState {
  Stage stage = Stage::announced;
  std::set<std::pair<std::string, std::string>> participants;  // (model_id, alias)
  bool reveal_done = false;
  std::optional<Timestamp> closed_at;
};

struct Challenge {
  ChallengeSpec spec;
  ChallengeState state;
  std::vector<SeriesAlias> aliases;

  const SeriesAlias* find_alias(std::string_view alias) const;
};

/// Per-bucket cadence and challenge parameters.
struct BucketSchedule {
  BucketKey bucket;
  int cadence_per_day = 1;
  Duration phase_offset{0};
  int k = 10;
  int context_length = 168;
  Duration registration_window{3600};
  Duration announce_lead{6 * 3600};
  int grace_steps = 6;
  std::vector<std::string> fixed_series;  // non-empty selects fixed mode
  std::uint64_t seed = 0;
};

struct ScheduleConfig {
  std::vector<BucketSchedule> buckets;
  Duration planning_horizon{86400};
  std::optional<Timestamp> not_before;  // earliest t_p to plan
  std::optional<Timestamp> not_after;   // t_p must be strictly earlier
};

// Throws on invalid configuration; returns non-fatal warnings (the
// inference-time feasibility check for very short frequencies).
std::vector<std::string> validate(const ScheduleConfig& config);

using EligibleFn = std::function<std::vector<SeriesId>(const BucketKey&)>;

// Deterministic id, e.g. "energy-PT1H-PT24H-20251214T1100Z".
std::string challenge_id_for(const BucketKey& bucket, Timestamp t_p);

// Slots of one bucket with t_p in (now, now + planning_horizon], spaced
// 86400 / cadence apart from the UTC midnight plus phase offset. Throws
// NoEligibleSeries when a random bucket has fewer than k eligible series.
std::vector<ChallengeSpec> plan_bucket(const BucketSchedule& schedule, const ScheduleConfig& config, Timestamp now,
                                       const EligibleFn& eligible);
std::vector<ChallengeSpec> plan_challenges(const ScheduleConfig& config, Timestamp now, const EligibleFn& eligible);

// k distinct series drawn uniformly without replacement (partial
// Fisher-Yates over the key-sorted eligible list, mt19937_64 seeded by seed).
// Throws InsufficientEligible.
std::vector<SeriesAlias> sample_random(const BucketKey& bucket, int k, std::uint64_t seed,
                                       std::vector<SeriesId> eligible, const std::string& challenge_id,
                                       const std::string& secret);

std::string make_alias(const std::string& secret, const std::string& challenge_id, const std::string& series_key);

struct Transition {
  std::string challenge_id;
  Stage from;
  Stage to;
};

/// Owns the challenge table and drives the four-stage lifecycle.
class Orchestrator {
 public:
  Orchestrator(const Scd2Store& store, const Ingestor& ingestor, ScheduleConfig config, std::string secret);

  // Creates every not-yet-known planned challenge. Buckets without enough
  // fresh series are skipped (and retried on later calls).
  std::vector<ChallengeSpec> plan(Timestamp now);

  // Adds one challenge; selects and aliases its series at `now`.
  const Challenge& create(ChallengeSpec spec, Timestamp now);

  // Stage implied by (spec, store, now), never earlier than the recorded one.
  Stage stage_at(const std::string& challenge_id, Timestamp now) const;

  // Applies the implied stage; side effects (reveal, closed_at) run once.
  ChallengeState advance(const std::string& challenge_id, Timestamp now);
  std::vector<Transition> tick(Timestamp now);

  // Throws StillInRegistration before the challenge leaves registration.
  std::vector<std::pair<std::string, std::string>> reveal(const std::string& challenge_id);

  void record_participation(const std::string& challenge_id, const std::string& model_id, const std::string& alias);

  Challenge get(const std::string& challenge_id) const;
  std::vector<Challenge> list() const;
  bool contains(const std::string& challenge_id) const;

  const ScheduleConfig& config() const { return config_; }
  EligibleFn eligible_fn(Timestamp now) const;

  // Journal replay.
  void restore(Challenge challenge);
  void restore_stage(const std::string& challenge_id, Stage stage, std::optional<Timestamp> closed_at);
  void set_on_create(std::function<void(const Challenge&)> hook) { on_create_ = std::move(hook); }
  // Called under the table lock for every stage change made by advance/tick.
  void set_on_transition(std::function<void(const Challenge&)> hook) { on_transition_ = std::move(hook); }

 private:
  Stage implied_stage(const Challenge& c, Timestamp now) const;
  Challenge& at(const std::string& challenge_id);
  const Challenge& at(const std::string& challenge_id) const;
  void apply(Challenge& c, Stage stage, Timestamp now);

  const Scd2Store& store_;
  const Ingestor& ingestor_;
  ScheduleConfig config_;
  std::string secret_;
  mutable std::mutex mutex_;
  std::map<std::string, Challenge> challenges_;
  std::function<void(const Challenge&)> on_create_;
  std::function<void(const Challenge&)> on_transition_;
};

void to_json(Json& j, const ChallengeSpec& s);
void from_json(const Json& j, ChallengeSpec& s);
void to_json(Json& j, const SeriesAlias& a);
void from_json(const Json& j, SeriesAlias& a);

}  // namespace arena
