#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arena/domain.hpp"
#include "arena/json_io.hpp"
#include "arena/scd2_store.hpp"

namespace arena {

// Seasonal lag used by the MASE scale: 15 min -> 96, hourly -> 24,
// daily -> 7, anything else -> 1.
int seasonal_period(Frequency frequency);

// In-sample mean absolute seasonal-naive error over a context on the
// given grid. Pairs with a gap at either end are skipped. Returns nullopt
// for a degenerate scale (zero mean or no usable pair). Throws
// InsufficientContext when fewer than m + 1 points are present.
std::optional<double> mase_scale(std::span<const Point> context, int m, Frequency frequency);

// Mean absolute error over the observed horizon steps divided by scale.
// actuals[i] is the observation for forecast[i], if any. Throws NoActuals.
double mase(std::span<const double> forecast, std::span<const std::optional<double>> actuals, double scale);

enum class ScoreStatus { partial, final, void_ };
std::string to_string(ScoreStatus status);

struct SeriesScore {
  std::string challenge_id;
  std::string series;  // SeriesId::key()
  std::string model_id;
  std::optional<double> mase;
  int steps_observed = 0;
  int steps_scored = 0;
  ScoreStatus status = ScoreStatus::partial;
  std::optional<double> scale;  // nullopt = degenerate
  // (step index 0..h-1, actual) pairs the score was computed from.
  std::vector<std::pair<int, double>> actuals_used;

  bool operator==(const SeriesScore&) const = default;
};

struct ChallengeScore {
  std::string challenge_id;
  std::string model_id;
  double aggregate_mase = 0.0;
  int series_count_scored = 0;
  int series_submitted = 0;
  Timestamp finalized_at;

  bool operator==(const ChallengeScore&) const = default;
};

struct EvalSubmission {
  std::string model_id;
  std::string series;
  std::vector<double> values;
};

/// Everything the evaluator needs to know about one challenge.
struct EvalInput {
  std::string challenge_id;
  Timestamp t_p;
  Frequency frequency;
  int horizon_h = 1;
  int context_length = 1;
  std::vector<std::string> series;
  std::vector<EvalSubmission> submissions;
  bool closed = false;
};

/// Incremental MASE evaluation. Scales are computed once per series from the
/// context as it was visible at t_p; actuals are read as-of the evaluation
/// time. Finalized results are frozen and never recomputed.
class Evaluator {
 public:
  explicit Evaluator(const Scd2Store& store, double coverage_floor = 0.5);

  std::vector<SeriesScore> update_partial(const EvalInput& input, Timestamp now);

  // Throws NotClosed unless input.closed. Idempotent: a second call returns
  // the frozen result.
  std::vector<ChallengeScore> finalize(const EvalInput& input, Timestamp now);

  bool is_finalized(const std::string& challenge_id) const;
  std::vector<SeriesScore> series_scores(const std::string& challenge_id) const;
  std::vector<ChallengeScore> challenge_scores(const std::string& challenge_id) const;
  std::vector<ChallengeScore> all_challenge_scores() const;
  std::vector<std::string> degenerate_series(const std::string& challenge_id) const;

  // Score export served at /v1/challenges/{id}/scores.
  Json report(const std::string& challenge_id) const;

  // Journal replay of a finalized challenge.
  void restore_final(const std::string& challenge_id, std::vector<SeriesScore> series,
                     std::vector<ChallengeScore> challenge, std::vector<std::string> degenerate);

  std::uint64_t generation() const;

 private:
  struct Book {
    std::map<std::string, std::optional<double>> scales;  // per series
    std::vector<SeriesScore> series;
    std::vector<ChallengeScore> challenge;
    bool finalized = false;
  };

  std::vector<SeriesScore> score_locked(Book& book, const EvalInput& input, Timestamp now);
  void ensure_scales(Book& book, const EvalInput& input);

  const Scd2Store& store_;
  double coverage_floor_;
  mutable std::mutex mutex_;
  std::map<std::string, Book> books_;
  std::uint64_t generation_ = 0;
};

void to_json(Json& j, const SeriesScore& s);
void to_json(Json& j, const ChallengeScore& s);
void from_json(const Json& j, SeriesScore& s);
void from_json(const Json& j, ChallengeScore& s);

}  // namespace arena
