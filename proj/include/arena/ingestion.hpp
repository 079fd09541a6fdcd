#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stop_token>
#include <string>
#include <vector>

#include "arena/clock.hpp"
#include "arena/scd2_store.hpp"
#include "arena/synthetic.hpp"

namespace arena {

struct RateLimit {
  int max_requests = 600;
  Duration per{60};
};

enum class ProviderKind { synthetic, http_stub };

struct ProviderDescriptor {
  std::string name;
  ProviderKind kind = ProviderKind::synthetic;
  std::vector<SeriesId> series_catalog;
  RateLimit rate_limit;
  Duration pull_interval{3600};
};

// Throws InvalidArgument when rate_limit or pull_interval are inconsistent.
void validate(const ProviderDescriptor& provider);

/// A point as the provider reports it: the stamp is kept as text so that the
/// provider's own zone rendering survives until normalization.
struct RawPoint {
  std::string event_time;
  double value = 0.0;
};

struct RawBatch {
  SeriesId series;
  std::vector<RawPoint> points;
  Timestamp pull_time;
  std::string endpoint;
};

/// Internal provider contract. Implementations throw
/// Error(Errc::ProviderUnavailable) for transient outages.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual const ProviderDescriptor& descriptor() const = 0;
  virtual RawBatch fetch(const SeriesId& series, Timestamp window_end, Duration lookback) = 0;
};

/// Feed backed by the analytic generator. Stamps are rendered in each
/// series' original timezone, as a real upstream would.
class SyntheticProvider final : public Provider {
 public:
  SyntheticProvider(ProviderDescriptor descriptor, std::vector<SyntheticSeriesSpec> specs);

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  RawBatch fetch(const SeriesId& series, Timestamp window_end, Duration lookback) override;

  // Outage simulation: fetches throw ProviderUnavailable while down.
  void set_down(bool down) { down_ = down; }
  void add_outage(Timestamp from, Timestamp to) { outages_.emplace_back(from, to); }

  const SyntheticSeriesSpec& spec(const std::string& series_key) const;

 private:
  ProviderDescriptor descriptor_;
  std::map<std::string, SyntheticSeriesSpec> specs_;
  bool down_ = false;
  std::vector<std::pair<Timestamp, Timestamp>> outages_;
};

/// Stand-in for a real HTTP connector: replays a recorded fixture file of
/// JSON lines {"external_id", "event_time" (with zone offset), "value"}.
class FixtureProvider final : public Provider {
 public:
  FixtureProvider(ProviderDescriptor descriptor, const std::filesystem::path& fixture);

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  RawBatch fetch(const SeriesId& series, Timestamp window_end, Duration lookback) override;

 private:
  struct Record {
    std::string event_time;
    std::optional<Timestamp> utc;
    double value;
  };
  ProviderDescriptor descriptor_;
  std::string endpoint_;
  std::map<std::string, std::vector<Record>> records_;
};

/// Sliding-window admission counter.
class RateLimiter {
 public:
  explicit RateLimiter(RateLimit limit) : limit_(limit) {}

  bool try_acquire(Timestamp now);
  // Earliest time at which a request would be admitted again.
  Timestamp retry_at(Timestamp now) const;
  // Admissions inside (now - per, now].
  int in_window(Timestamp now) const;

 private:
  void evict(Timestamp now) const;

  RateLimit limit_;
  mutable std::deque<Timestamp> admitted_;
  mutable std::mutex mutex_;
};

struct IngestReport {
  int inserted = 0;
  int superseded = 0;
  int noop = 0;
  int malformed = 0;

  IngestReport& operator+=(const IngestReport& o) {
    inserted += o.inserted;
    superseded += o.superseded;
    noop += o.noop;
    malformed += o.malformed;
    return *this;
  }
};

struct FreshnessReport {
  std::string series;
  std::optional<Timestamp> latest_event_time;
  bool stale = true;
};

class Ingestor {
 public:
  explicit Ingestor(Scd2Store& store) : store_(store) {}

  // Fetches the window ending at now, converts stamps to UTC, drops
  // malformed points, and upserts the rest. Throws RateLimited when the
  // provider's limiter refuses admission and ProviderUnavailable when the
  // provider is down.
  IngestReport pull_and_ingest(Provider& provider, const SeriesId& series, Timestamp now);

  FreshnessReport check_freshness(const std::string& series_key, Timestamp now) const;

  // Default: 3 x native frequency.
  void set_staleness_threshold(const std::string& series_key, Duration threshold);
  Duration staleness_threshold(const std::string& series_key) const;

  // Lookback of each pull; default 2 x the provider's pull_interval.
  void set_lookback_factor(int factor) { lookback_factor_ = factor; }

  int admitted_requests(const std::string& provider, Timestamp now) const;

 private:
  RateLimiter& limiter_for(const ProviderDescriptor& provider);

  Scd2Store& store_;
  int lookback_factor_ = 2;
  std::map<std::string, Duration> thresholds_;
  std::map<std::string, std::unique_ptr<RateLimiter>> limiters_;
  mutable std::mutex mutex_;
};

/// Polls each provider at its pull interval against whatever time it is
/// given. Failures stay with the provider that caused them.
class IngestionScheduler {
 public:
  struct ProviderStats {
    int pulls = 0;     // attempted polls
    int failures = 0;  // polls that hit ProviderUnavailable
    int consecutive_failures = 0;
    IngestReport totals;
    std::optional<Timestamp> next_due;
  };

  IngestionScheduler(Ingestor& ingestor, std::uint64_t jitter_seed = 0);

  void add(Provider& provider);

  // Runs every due poll at `now`. A clock jump across several intervals
  // yields a single catch-up poll. Returns the number of polls attempted.
  int tick(Timestamp now);

  // Long-running loop for realtime / accelerated clocks.
  void run(const Clock& clock, std::stop_token stop, std::chrono::milliseconds poll = std::chrono::milliseconds(200));

  const ProviderStats& stats(const std::string& provider) const { return stats_.at(provider); }

 private:
  Duration backoff(const ProviderDescriptor& provider, int attempt);

  Ingestor& ingestor_;
  std::vector<Provider*> providers_;
  std::map<std::string, ProviderStats> stats_;
  std::mt19937_64 jitter_;
};

}  // namespace arena
