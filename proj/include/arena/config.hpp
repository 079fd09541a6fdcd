#pragma once

#include <filesystem>
#include <string>

#include "arena/clock.hpp"
#include "arena/json_io.hpp"
#include "arena/platform.hpp"

namespace arena {

struct ClockConfig {
  VirtualClock::Mode mode = VirtualClock::Mode::realtime;
  std::optional<Timestamp> start;  // virtual modes; default = wall clock
  double factor = 1.0;
  bool system = true;  // no "clock" section: plain wall clock
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  Duration tick_interval{60};
};

struct ServiceConfig {
  PlatformConfig platform;
  ClockConfig clock;
  ServerConfig server;
};

// Relative fixture and data paths resolve against base_dir. Throws
// ParseError or InvalidArgument with the offending field.
PlatformConfig platform_config_from_json(const Json& j, const std::filesystem::path& base_dir);
ServiceConfig service_config_from_json(const Json& j, const std::filesystem::path& base_dir);
ServiceConfig load_service_config(const std::filesystem::path& file);

Json read_json_file(const std::filesystem::path& file);

SyntheticSeriesSpec synthetic_spec_from_json(const Json& j, const SeriesId& series, std::uint64_t default_seed);
BucketSchedule bucket_schedule_from_json(const Json& j);
BaselineConfig baseline_config_from_json(const Json& j);
RateLimit rate_limit_from_json(const Json& j);

}  // namespace arena
