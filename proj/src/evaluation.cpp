#include "arena/evaluation.hpp"

#include <cmath>
#include <limits>

#include "arena/error.hpp"
#include "arena/kernels.hpp"

namespace arena {

int seasonal_period(Frequency frequency) {
  switch (frequency.step().count()) {
    case 900: return 96;
    case 3600: return 24;
    case 86400: return 7;
    default: return 1;
  }
}

std::optional<double> mase_scale(std::span<const Point> context, int m, Frequency frequency) {
  if (m < 1) throw Error(Errc::InvalidArgument, "seasonal period must be >= 1");
  if (context.size() < static_cast<std::size_t>(m) + 1) {
    throw Error(Errc::InsufficientContext,
                std::to_string(context.size()) + " points, need at least " + std::to_string(m + 1));
  }
  const auto step = frequency.step();
  const Timestamp first = context.front().event_time;
  const auto span_steps = (context.back().event_time - first) / step;
  std::vector<double> dense(static_cast<std::size_t>(span_steps) + 1, std::numeric_limits<double>::quiet_NaN());
  for (const auto& p : context) {
    if ((p.event_time - first) % step != Duration::zero()) {
      throw Error(Errc::OffGrid, "context point off the " + frequency.iso() + " grid");
    }
    dense[static_cast<std::size_t>((p.event_time - first) / step)] = p.value;
  }
  const double scale = kernels::seasonal_scale_row(dense, m);
  if (!std::isfinite(scale) || scale == 0.0) return std::nullopt;
  return scale;
}

double mase(std::span<const double> forecast, std::span<const std::optional<double>> actuals, double scale) {
  if (forecast.size() != actuals.size()) {
    throw Error(Errc::WrongLength, "forecast and actuals must align on the horizon grid");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(Errc::InvalidArgument, "scale must be positive");
  std::vector<double> dense(actuals.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (actuals[i]) dense[i] = *actuals[i];
  }
  const auto row = kernels::score_row(forecast, dense, scale);
  if (row.observed == 0) throw Error(Errc::NoActuals, "no horizon step observed yet");
  return row.mase;
}

std::string to_string(ScoreStatus status) {
  switch (status) {
    case ScoreStatus::partial: return "partial";
    case ScoreStatus::final: return "final";
    case ScoreStatus::void_: return "void";
  }
  return "unknown";
}

Evaluator::Evaluator(const Scd2Store& store, double coverage_floor) : store_(store), coverage_floor_(coverage_floor) {}

void Evaluator::ensure_scales(Book& book, const EvalInput& input) {
  const auto step = input.frequency.step();
  const Timestamp from = input.t_p - (input.context_length - 1) * step;
  for (const auto& series : input.series) {
    if (book.scales.contains(series)) continue;
    // The scale binds to the context exactly as it was visible at t_p.
    const auto view = store_.as_of(series, from, input.t_p, input.t_p);
    int m = seasonal_period(input.frequency);
    if (view.points.size() < static_cast<std::size_t>(m) + 1) m = 1;
    std::optional<double> scale;
    if (view.points.size() >= 2) scale = mase_scale(view.points, m, input.frequency);
    book.scales.emplace(series, scale);
  }
}

std::vector<SeriesScore> Evaluator::score_locked(Book& book, const EvalInput& input, Timestamp now) {
  ensure_scales(book, input);
  const int h = input.horizon_h;
  const auto step = input.frequency.step();

  // Horizon actuals as visible now, one dense row per series.
  std::map<std::string, std::vector<double>> actuals;
  for (const auto& series : input.series) {
    std::vector<double> row(static_cast<std::size_t>(h), std::numeric_limits<double>::quiet_NaN());
    for (const auto& p : store_.as_of(series, input.t_p + step, input.t_p + h * step, now).points) {
      row[static_cast<std::size_t>((p.event_time - input.t_p) / step - 1)] = p.value;
    }
    actuals.emplace(series, std::move(row));
  }

  std::vector<const EvalSubmission*> rows;
  for (const auto& sub : input.submissions) {
    if (actuals.contains(sub.series) && static_cast<int>(sub.values.size()) == h) rows.push_back(&sub);
  }

  kernels::MaseBatch batch;
  batch.rows = static_cast<int>(rows.size());
  batch.h = h;
  batch.forecasts.reserve(rows.size() * static_cast<std::size_t>(h));
  batch.actuals.reserve(rows.size() * static_cast<std::size_t>(h));
  for (const auto* sub : rows) {
    const auto& act = actuals.at(sub->series);
    batch.forecasts.insert(batch.forecasts.end(), sub->values.begin(), sub->values.end());
    batch.actuals.insert(batch.actuals.end(), act.begin(), act.end());
    const auto& scale = book.scales.at(sub->series);
    batch.scales.push_back(scale ? *scale : std::numeric_limits<double>::quiet_NaN());
  }
  const auto results = kernels::score_parallel(batch);

  std::vector<SeriesScore> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& sub = *rows[r];
    SeriesScore score;
    score.challenge_id = input.challenge_id;
    score.series = sub.series;
    score.model_id = sub.model_id;
    score.scale = book.scales.at(sub.series);
    score.steps_observed = results[r].observed;
    score.steps_scored = results[r].observed;
    if (!std::isnan(results[r].mase)) score.mase = results[r].mase;
    const auto& act = actuals.at(sub.series);
    for (int i = 0; i < h; ++i) {
      if (!std::isnan(act[static_cast<std::size_t>(i)])) score.actuals_used.emplace_back(i, act[static_cast<std::size_t>(i)]);
    }
    out.push_back(std::move(score));
  }
  std::sort(out.begin(), out.end(), [](const SeriesScore& a, const SeriesScore& b) {
    return std::tie(a.model_id, a.series) < std::tie(b.model_id, b.series);
  });
  return out;
}

std::vector<SeriesScore> Evaluator::update_partial(const EvalInput& input, Timestamp now) {
  std::lock_guard lock(mutex_);
  auto& book = books_[input.challenge_id];
  if (book.finalized) return book.series;
  book.series = score_locked(book, input, now);
  ++generation_;
  return book.series;
}

std::vector<ChallengeScore> Evaluator::finalize(const EvalInput& input, Timestamp now) {
  std::lock_guard lock(mutex_);
  auto& book = books_[input.challenge_id];
  if (book.finalized) return book.challenge;
  if (!input.closed) throw Error(Errc::NotClosed, input.challenge_id);

  auto scores = score_locked(book, input, now);
  std::map<std::string, std::pair<double, int>> sums;
  std::map<std::string, int> submitted;
  for (auto& s : scores) {
    ++submitted[s.model_id];
    const bool covered = s.steps_observed >= coverage_floor_ * input.horizon_h;
    s.status = (covered && s.mase) ? ScoreStatus::final : ScoreStatus::void_;
    if (s.status == ScoreStatus::final) {
      auto& [sum, n] = sums[s.model_id];
      sum += *s.mase;
      ++n;
    }
  }
  std::vector<ChallengeScore> challenge;
  for (const auto& [model, agg] : sums) {
    challenge.push_back(ChallengeScore{input.challenge_id, model, agg.first / agg.second, agg.second,
                                       submitted[model], now});
  }
  book.series = std::move(scores);
  book.challenge = challenge;
  book.finalized = true;
  ++generation_;
  return challenge;
}

bool Evaluator::is_finalized(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  auto it = books_.find(challenge_id);
  return it != books_.end() && it->second.finalized;
}

std::vector<SeriesScore> Evaluator::series_scores(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  auto it = books_.find(challenge_id);
  return it == books_.end() ? std::vector<SeriesScore>{} : it->second.series;
}

std::vector<ChallengeScore> Evaluator::challenge_scores(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  auto it = books_.find(challenge_id);
  return it == books_.end() ? std::vector<ChallengeScore>{} : it->second.challenge;
}

std::vector<ChallengeScore> Evaluator::all_challenge_scores() const {
  std::lock_guard lock(mutex_);
  std::vector<ChallengeScore> out;
  for (const auto& [id, book] : books_) {
    if (book.finalized) out.insert(out.end(), book.challenge.begin(), book.challenge.end());
  }
  return out;
}

std::vector<std::string> Evaluator::degenerate_series(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  auto it = books_.find(challenge_id);
  if (it == books_.end()) return out;
  for (const auto& [series, scale] : it->second.scales) {
    if (!scale) out.push_back(series);
  }
  return out;
}

void Evaluator::restore_final(const std::string& challenge_id, std::vector<SeriesScore> series,
                              std::vector<ChallengeScore> challenge, std::vector<std::string> degenerate) {
  std::lock_guard lock(mutex_);
  auto& book = books_[challenge_id];
  for (const auto& s : series) book.scales[s.series] = s.scale;
  for (const auto& d : degenerate) book.scales[d] = std::nullopt;
  book.series = std::move(series);
  book.challenge = std::move(challenge);
  book.finalized = true;
  ++generation_;
}

std::uint64_t Evaluator::generation() const {
  std::lock_guard lock(mutex_);
  return generation_;
}

Json Evaluator::report(const std::string& challenge_id) const {
  std::lock_guard lock(mutex_);
  Json j{{"challenge_id", challenge_id}, {"finalized", false}, {"series", Json::array()}, {"aggregate", Json::array()},
         {"degenerate_series", Json::array()}};
  auto it = books_.find(challenge_id);
  if (it == books_.end()) return j;
  const auto& book = it->second;
  j["finalized"] = book.finalized;
  for (const auto& s : book.series) j["series"].push_back(s);
  for (const auto& c : book.challenge) j["aggregate"].push_back(c);
  for (const auto& [series, scale] : book.scales) {
    if (!scale) j["degenerate_series"].push_back(series);
  }
  return j;
}

namespace {
Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
std::optional<double> opt_from(const Json& j) {
  return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}
}  // namespace

void to_json(Json& j, const SeriesScore& s) {
  Json used = Json::array();
  for (const auto& [step, value] : s.actuals_used) used.push_back(Json::array({step, value}));
  j = Json{{"challenge_id", s.challenge_id},
           {"series", s.series},
           {"model_id", s.model_id},
           {"mase", opt_json(s.mase)},
           {"steps_observed", s.steps_observed},
           {"steps_scored", s.steps_scored},
           {"status", to_string(s.status)},
           {"scale", opt_json(s.scale)},
           {"degenerate", !s.scale.has_value()},
           {"actuals_used", used}};
}

void from_json(const Json& j, SeriesScore& s) {
  s.challenge_id = j.at("challenge_id").get<std::string>();
  s.series = j.at("series").get<std::string>();
  s.model_id = j.at("model_id").get<std::string>();
  s.mase = opt_from(j.at("mase"));
  s.steps_observed = j.at("steps_observed").get<int>();
  s.steps_scored = j.at("steps_scored").get<int>();
  const auto status = j.at("status").get<std::string>();
  s.status = status == "final" ? ScoreStatus::final : status == "void" ? ScoreStatus::void_ : ScoreStatus::partial;
  s.scale = opt_from(j.at("scale"));
  s.actuals_used.clear();
  for (const auto& pair : j.at("actuals_used")) s.actuals_used.emplace_back(pair.at(0).get<int>(), pair.at(1).get<double>());
}

void to_json(Json& j, const ChallengeScore& s) {
  j = Json{{"challenge_id", s.challenge_id},
           {"model_id", s.model_id},
           {"aggregate_mase", s.aggregate_mase},
           {"series_count_scored", s.series_count_scored},
           {"series_submitted", s.series_submitted},
           {"finalized_at", ts_json(s.finalized_at)}};
}

void from_json(const Json& j, ChallengeScore& s) {
  s.challenge_id = j.at("challenge_id").get<std::string>();
  s.model_id = j.at("model_id").get<std::string>();
  s.aggregate_mase = j.at("aggregate_mase").get<double>();
  s.series_count_scored = j.at("series_count_scored").get<int>();
  s.series_submitted = j.at("series_submitted").get<int>();
  s.finalized_at = ts_from(j.at("finalized_at"));
}

}  // namespace arena
