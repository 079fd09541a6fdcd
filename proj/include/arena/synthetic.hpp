#pragma once

#include <cstdint>
#include <optional>

#include "arena/domain.hpp"

namespace arena {

/// Analytic generator for one synthetic feed:
///   value(t) = base + trend*steps + amplitude*sin(2*pi*position/period) + noise(seed, t)
/// where steps counts grid steps from `origin` and position = steps mod period.
///
/// Publication model: a point becomes available emission_delay after its
/// event time. With probability correction_rate (decided per point from the
/// seed) it is first published off by revision_offset and revised to the
/// analytic value revision_delay later.
struct SyntheticSeriesSpec {
  SeriesId series;
  Timestamp origin;
  double base = 0.0;
  double trend_per_step = 0.0;
  double seasonal_amplitude = 0.0;
  int seasonal_period = 24;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  Duration emission_delay{0};
  double correction_rate = 0.0;
  double revision_offset = 0.0;
  Duration revision_delay{3600};
};

void validate(const SyntheticSeriesSpec& spec);

// Pure in (spec, event_time). Throws OffGrid for times off the series grid.
double generate(const SyntheticSeriesSpec& spec, Timestamp event_time);

bool is_corrected(const SyntheticSeriesSpec& spec, Timestamp event_time);

// What the feed shows for event_time when polled at `at`, or nothing if the
// point has not been published yet.
std::optional<double> published_value(const SyntheticSeriesSpec& spec, Timestamp event_time, Timestamp at);

// Deterministic 64-bit mixing (splitmix64 finalizer) used for named substreams.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name);

}  // namespace arena
