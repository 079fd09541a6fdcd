#include "arena/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "arena/error.hpp"

namespace arena {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the name, folded into the parent seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(seed ^ mix64(h));
}

namespace {

double unit_uniform(std::uint64_t bits) {
  // 53 random mantissa bits in (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

long long steps_from_origin(const SyntheticSeriesSpec& spec, Timestamp event_time) {
  const auto step = spec.series.native_frequency.step().count();
  const auto delta = (event_time - spec.origin).count();
  if (!on_grid(event_time, spec.series.native_frequency) || delta % step != 0) {
    throw Error(Errc::OffGrid, spec.series.key() + " has no grid point at " + format_rfc3339(event_time));
  }
  return delta / step;
}

}  // namespace

void validate(const SyntheticSeriesSpec& spec) {
  if (spec.noise_std < 0.0) throw Error(Errc::InvalidArgument, "noise_std must be >= 0");
  if (spec.correction_rate < 0.0 || spec.correction_rate > 1.0) {
    throw Error(Errc::InvalidArgument, "correction_rate must lie in [0, 1]");
  }
  if (spec.seasonal_period < 1) throw Error(Errc::InvalidArgument, "seasonal_period must be >= 1");
  if (!on_grid(spec.origin, spec.series.native_frequency)) {
    throw Error(Errc::OffGrid, "synthetic origin must lie on the series grid");
  }
}

double generate(const SyntheticSeriesSpec& spec, Timestamp event_time) {
  const long long steps = steps_from_origin(spec, event_time);
  const long long period = spec.seasonal_period;
  const long long position = ((steps % period) + period) % period;
  double value = spec.base + spec.trend_per_step * static_cast<double>(steps);
  if (spec.seasonal_amplitude != 0.0) {
    value += spec.seasonal_amplitude *
             std::sin(2.0 * std::numbers::pi * static_cast<double>(position) / static_cast<double>(period));
  }
  if (spec.noise_std > 0.0) {
    const auto key = mix64(spec.seed ^ static_cast<std::uint64_t>(to_unix(event_time)));
    const double u1 = unit_uniform(mix64(key));
    const double u2 = unit_uniform(mix64(key + 1));
    value += spec.noise_std * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  return value;
}

bool is_corrected(const SyntheticSeriesSpec& spec, Timestamp event_time) {
  if (spec.correction_rate <= 0.0) return false;
  const auto bits = mix64(substream_seed(spec.seed, "correction") ^ static_cast<std::uint64_t>(to_unix(event_time)));
  return unit_uniform(bits) < spec.correction_rate;
}

std::optional<double> published_value(const SyntheticSeriesSpec& spec, Timestamp event_time, Timestamp at) {
  const Timestamp first = event_time + spec.emission_delay;
  if (at < first) return std::nullopt;
  const double truth = generate(spec, event_time);
  if (is_corrected(spec, event_time) && at < first + spec.revision_delay) return truth + spec.revision_offset;
  return truth;
}

}  // namespace arena
