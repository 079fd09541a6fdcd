#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "arena/time.hpp"

namespace arena {

/// Sampling step of a series or challenge grid. Always strictly positive.
class Frequency {
 public:
  Frequency() = default;
  explicit Frequency(Duration step);
  Duration step() const noexcept { return step_; }
  std::string iso() const { return format_iso_duration(step_); }
  static Frequency parse(std::string_view iso) { return Frequency(parse_iso_duration(iso)); }

  auto operator<=>(const Frequency&) const = default;

 private:
  Duration step_{3600};
};

/// Identity and metadata of one observed series. (provider, external_id) is
/// the unique key; everything else is descriptive.
struct SeriesId {
  std::string provider;
  std::string external_id;
  std::string domain;
  std::string subdomain;
  Frequency native_frequency{Duration{3600}};
  std::string display_name;
  std::string original_timezone = "UTC";

  // Stable map key, "provider/external_id".
  std::string key() const { return provider + "/" + external_id; }
};

/// Challenges with identical (domain, frequency, horizon) share a bucket.
struct BucketKey {
  std::string domain;
  Frequency frequency{Duration{3600}};
  Duration horizon{86400};

  auto operator<=>(const BucketKey&) const = default;
  std::string label() const { return domain + "/" + frequency.iso() + "/" + format_iso_duration(horizon); }
};

/// Leaderboard filter. Unset fields match everything.
struct Scope {
  std::optional<std::string> domain;
  std::optional<Frequency> frequency;
  std::optional<Duration> horizon;

  bool matches(const BucketKey& bucket) const;
  static Scope of(const BucketKey& bucket) { return Scope{bucket.domain, bucket.frequency, bucket.horizon}; }

  bool operator==(const Scope&) const = default;
};

struct Point {
  Timestamp event_time;
  double value = 0.0;

  bool operator==(const Point&) const = default;
};

/// Served history ending at the pre-registration cutoff t_p. Gaps are absent
/// points, never filled.
struct ContextWindow {
  Timestamp t_p;
  Frequency frequency;
  std::vector<Point> points;
};

// Number of grid steps in a horizon. Throws NonDivisible when the step does
// not divide the horizon exactly.
int horizon_steps(Duration horizon, Frequency frequency);

// [t_p + step, ..., t_p + h*step]
std::vector<Timestamp> horizon_grid(Timestamp t_p, Frequency frequency, int h);

// True when t lies on the epoch-anchored grid of the given step.
bool on_grid(Timestamp t, Frequency frequency);

}  // namespace arena
