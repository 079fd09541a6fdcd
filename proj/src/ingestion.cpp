#include "arena/ingestion.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "arena/error.hpp"
#include "arena/json_io.hpp"

namespace arena {

void validate(const ProviderDescriptor& provider) {
  if (provider.rate_limit.max_requests <= 0 || provider.rate_limit.per.count() <= 0) {
    throw Error(Errc::InvalidArgument, provider.name + ": rate_limit must be positive");
  }
  for (const auto& s : provider.series_catalog) {
    if (provider.pull_interval < s.native_frequency.step()) {
      throw Error(Errc::InvalidArgument,
                  provider.name + ": pull_interval is shorter than the native frequency of " + s.key());
    }
  }
}

// --- SyntheticProvider -----------------------------------------------------

SyntheticProvider::SyntheticProvider(ProviderDescriptor descriptor, std::vector<SyntheticSeriesSpec> specs)
    : descriptor_(std::move(descriptor)) {
  validate(descriptor_);
  for (auto& spec : specs) {
    validate(spec);
    specs_.emplace(spec.series.key(), std::move(spec));
  }
}

const SyntheticSeriesSpec& SyntheticProvider::spec(const std::string& series_key) const {
  auto it = specs_.find(series_key);
  if (it == specs_.end()) throw Error(Errc::UnknownSeries, series_key);
  return it->second;
}

RawBatch SyntheticProvider::fetch(const SeriesId& series, Timestamp window_end, Duration lookback) {
  if (down_) throw Error(Errc::ProviderUnavailable, descriptor_.name + " is down");
  for (const auto& [from, to] : outages_) {
    if (from <= window_end && window_end < to) throw Error(Errc::ProviderUnavailable, descriptor_.name + " outage");
  }
  const auto& s = spec(series.key());
  const auto step = s.series.native_frequency.step();
  RawBatch batch{s.series, {}, window_end, "synthetic://" + descriptor_.name + "/" + s.series.external_id};

  // First grid point at or after the window start, never before the origin.
  Timestamp start = std::max(window_end - lookback, s.origin);
  const auto rem = to_unix(start) % step.count();
  if (rem != 0) start += step - Duration{rem};
  for (Timestamp t = start; t <= window_end; t += step) {
    if (auto v = published_value(s, t, window_end)) {
      batch.points.push_back(RawPoint{format_in_zone(t, s.series.original_timezone), *v});
    }
  }
  return batch;
}

// --- FixtureProvider -------------------------------------------------------

FixtureProvider::FixtureProvider(ProviderDescriptor descriptor, const std::filesystem::path& fixture)
    : descriptor_(std::move(descriptor)), endpoint_("fixture://" + fixture.filename().string()) {
  validate(descriptor_);
  std::ifstream in(fixture);
  if (!in) throw Error(Errc::InvalidArgument, "cannot read fixture " + fixture.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto rec = Json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("external_id")) continue;
    Record r;
    r.event_time = rec.value("event_time", "");
    try {
      r.utc = parse_rfc3339(r.event_time);
    } catch (const Error&) {
      r.utc = std::nullopt;
    }
    const auto& v = rec.contains("value") ? rec.at("value") : Json();
    r.value = v.is_number() ? v.get<double>() : std::nan("");
    records_[rec.at("external_id").get<std::string>()].push_back(std::move(r));
  }
}

RawBatch FixtureProvider::fetch(const SeriesId& series, Timestamp window_end, Duration lookback) {
  RawBatch batch{series, {}, window_end, endpoint_ + "/" + series.external_id};
  auto it = records_.find(series.external_id);
  if (it == records_.end()) return batch;
  for (const auto& r : it->second) {
    // Unparseable stamps are passed through so normalization can count them.
    if (!r.utc || (*r.utc > window_end - lookback && *r.utc <= window_end)) {
      batch.points.push_back(RawPoint{r.event_time, r.value});
    }
  }
  return batch;
}

// --- RateLimiter -----------------------------------------------------------

void RateLimiter::evict(Timestamp now) const {
  while (!admitted_.empty() && admitted_.front() <= now - limit_.per) admitted_.pop_front();
}

bool RateLimiter::try_acquire(Timestamp now) {
  std::lock_guard lock(mutex_);
  evict(now);
  if (static_cast<int>(admitted_.size()) >= limit_.max_requests) return false;
  admitted_.push_back(now);
  return true;
}

Timestamp RateLimiter::retry_at(Timestamp now) const {
  std::lock_guard lock(mutex_);
  evict(now);
  if (static_cast<int>(admitted_.size()) < limit_.max_requests) return now;
  return admitted_.front() + limit_.per;
}

int RateLimiter::in_window(Timestamp now) const {
  std::lock_guard lock(mutex_);
  evict(now);
  return static_cast<int>(admitted_.size());
}

// --- Ingestor --------------------------------------------------------------

RateLimiter& Ingestor::limiter_for(const ProviderDescriptor& provider) {
  std::lock_guard lock(mutex_);
  auto& slot = limiters_[provider.name];
  if (!slot) slot = std::make_unique<RateLimiter>(provider.rate_limit);
  return *slot;
}

int Ingestor::admitted_requests(const std::string& provider, Timestamp now) const {
  std::lock_guard lock(mutex_);
  auto it = limiters_.find(provider);
  return it == limiters_.end() ? 0 : it->second->in_window(now);
}

IngestReport Ingestor::pull_and_ingest(Provider& provider, const SeriesId& series, Timestamp now) {
  const auto& desc = provider.descriptor();
  const bool served = std::any_of(desc.series_catalog.begin(), desc.series_catalog.end(),
                                  [&](const SeriesId& s) { return s.key() == series.key(); });
  if (!served) throw Error(Errc::UnknownSeries, series.key() + " is not served by " + desc.name);
  if (!limiter_for(desc).try_acquire(now)) throw Error(Errc::RateLimited, desc.name);

  RawBatch batch = provider.fetch(series, now, lookback_factor_ * desc.pull_interval);

  IngestReport report;
  // Last occurrence wins when a batch repeats an event time.
  std::map<Timestamp, double> normalized;
  for (const auto& raw : batch.points) {
    Timestamp utc;
    try {
      utc = raw.event_time.find_first_of("Zz+") != std::string::npos ||
                    (raw.event_time.size() > 19 && raw.event_time[19] == '-')
                ? parse_rfc3339(raw.event_time)
                : parse_local_in_zone(raw.event_time, series.original_timezone);
    } catch (const Error& e) {
      ++report.malformed;
      spdlog::warn("{}: malformed stamp '{}' ({})", series.key(), raw.event_time, e.what());
      continue;
    }
    if (!std::isfinite(raw.value) || !on_grid(utc, series.native_frequency)) {
      ++report.malformed;
      spdlog::warn("{}: malformed record at {}", series.key(), raw.event_time);
      continue;
    }
    normalized[utc] = raw.value;
  }

  const Provenance provenance{desc.name, batch.endpoint, now};
  for (const auto& [t, v] : normalized) {
    switch (store_.upsert(series.key(), t, v, provenance)) {
      case UpsertOutcome::inserted: ++report.inserted; break;
      case UpsertOutcome::superseded: ++report.superseded; break;
      case UpsertOutcome::noop: ++report.noop; break;
    }
  }
  store_.flush();
  return report;
}

void Ingestor::set_staleness_threshold(const std::string& series_key, Duration threshold) {
  std::lock_guard lock(mutex_);
  thresholds_[series_key] = threshold;
}

Duration Ingestor::staleness_threshold(const std::string& series_key) const {
  {
    std::lock_guard lock(mutex_);
    auto it = thresholds_.find(series_key);
    if (it != thresholds_.end()) return it->second;
  }
  return 3 * store_.series(series_key).native_frequency.step();
}

FreshnessReport Ingestor::check_freshness(const std::string& series_key, Timestamp now) const {
  FreshnessReport report{series_key, store_.latest_event_time(series_key, now), true};
  if (report.latest_event_time) report.stale = now - *report.latest_event_time > staleness_threshold(series_key);
  return report;
}

// --- IngestionScheduler ----------------------------------------------------

IngestionScheduler::IngestionScheduler(Ingestor& ingestor, std::uint64_t jitter_seed)
    : ingestor_(ingestor), jitter_(jitter_seed) {}

void IngestionScheduler::add(Provider& provider) {
  validate(provider.descriptor());
  providers_.push_back(&provider);
  stats_.try_emplace(provider.descriptor().name);
}

Duration IngestionScheduler::backoff(const ProviderDescriptor& provider, int attempt) {
  // 30 s * 2^attempt with full jitter, capped at the pull interval.
  const long long cap = provider.pull_interval.count();
  const long long base = std::min(cap, 30LL << std::min(attempt, 20));
  std::uniform_int_distribution<long long> dist(base / 2, base);
  return Duration{std::max(1LL, std::min(cap, dist(jitter_)))};
}

int IngestionScheduler::tick(Timestamp now) {
  int polls = 0;
  for (Provider* provider : providers_) {
    const auto& desc = provider->descriptor();
    auto& st = stats_[desc.name];
    if (st.next_due && now < *st.next_due) continue;

    ++st.pulls;
    ++polls;
    bool failed = false;
    for (const auto& series : desc.series_catalog) {
      try {
        st.totals += ingestor_.pull_and_ingest(*provider, series, now);
      } catch (const Error& e) {
        if (e.code() == Errc::ProviderUnavailable) {
          failed = true;
          break;
        }
        spdlog::warn("ingestion {} {}: {}", desc.name, series.key(), e.what());
      }
    }
    const auto interval = desc.pull_interval.count();
    const Timestamp next_slot = from_unix((to_unix(now) / interval + 1) * interval);
    if (failed) {
      ++st.failures;
      ++st.consecutive_failures;
      st.next_due = std::min(next_slot, now + backoff(desc, st.consecutive_failures - 1));
      spdlog::warn("provider {} unavailable ({} consecutive)", desc.name, st.consecutive_failures);
    } else {
      st.consecutive_failures = 0;
      st.next_due = next_slot;
    }
  }
  return polls;
}

void IngestionScheduler::run(const Clock& clock, std::stop_token stop, std::chrono::milliseconds poll) {
  while (!stop.stop_requested()) {
    tick(clock.now());
    std::this_thread::sleep_for(poll);
  }
}

}  // namespace arena
