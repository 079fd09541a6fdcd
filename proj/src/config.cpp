#include "arena/config.hpp"

#include <fstream>

#include "arena/error.hpp"

namespace arena {

namespace {

template <class T>
T opt(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Duration opt_dur(const Json& j, const char* key, Duration fallback) {
  return j.contains(key) ? dur_from(j.at(key)) : fallback;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

BaselineConfig::Kind parse_kind(const std::string& s) {
  if (s == "naive") return BaselineConfig::Kind::naive;
  if (s == "moving_average") return BaselineConfig::Kind::moving_average;
  if (s == "seasonal_average") return BaselineConfig::Kind::seasonal_average;
  throw Error(Errc::InvalidArgument, "unknown baseline kind '" + s + "'");
}

}  // namespace

Json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::InvalidArgument, "cannot read " + file.string());
  auto j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, file.string() + " is not valid JSON");
  return j;
}

RateLimit rate_limit_from_json(const Json& j) {
  RateLimit r;
  r.max_requests = opt(j, "max_requests", r.max_requests);
  r.per = opt_dur(j, "per", r.per);
  return r;
}

SyntheticSeriesSpec synthetic_spec_from_json(const Json& j, const SeriesId& series, std::uint64_t default_seed) {
  SyntheticSeriesSpec s;
  s.series = series;
  s.origin = j.contains("origin") ? ts_from(j.at("origin")) : from_unix(0);
  s.base = opt(j, "base", s.base);
  s.trend_per_step = opt(j, "trend_per_step", s.trend_per_step);
  s.seasonal_amplitude = opt(j, "seasonal_amplitude", s.seasonal_amplitude);
  s.seasonal_period = opt(j, "seasonal_period", s.seasonal_period);
  s.noise_std = opt(j, "noise_std", s.noise_std);
  s.seed = opt<std::uint64_t>(j, "seed", default_seed);
  s.emission_delay = opt_dur(j, "emission_delay", s.emission_delay);
  s.correction_rate = opt(j, "correction_rate", s.correction_rate);
  s.revision_offset = opt(j, "revision_offset", s.revision_offset);
  s.revision_delay = opt_dur(j, "revision_delay", s.revision_delay);
  validate(s);
  return s;
}

BucketSchedule bucket_schedule_from_json(const Json& j) {
  BucketSchedule b;
  b.bucket.domain = j.at("domain").get<std::string>();
  b.bucket.frequency = Frequency::parse(j.at("frequency").get<std::string>());
  b.bucket.horizon = dur_from(j.at("horizon"));
  b.cadence_per_day = opt(j, "cadence_per_day", b.cadence_per_day);
  b.phase_offset = opt_dur(j, "phase_offset", b.phase_offset);
  b.k = opt(j, "k", b.k);
  b.context_length = opt(j, "context_length", b.context_length);
  b.registration_window = opt_dur(j, "registration_window", b.registration_window);
  b.announce_lead = opt_dur(j, "announce_lead", b.announce_lead);
  b.grace_steps = opt(j, "grace_steps", b.grace_steps);
  b.fixed_series = opt(j, "fixed_series", b.fixed_series);
  b.seed = opt<std::uint64_t>(j, "seed", b.seed);
  return b;
}

BaselineConfig baseline_config_from_json(const Json& j) {
  BaselineConfig b;
  b.name = j.at("name").get<std::string>();
  b.kind = parse_kind(opt<std::string>(j, "kind", "naive"));
  b.window = opt(j, "window", b.window);
  b.period = opt(j, "period", b.period);
  b.periods = opt(j, "periods", b.periods);
  if (j.contains("scopes")) b.auto_enroll_scopes = j.at("scopes").get<std::vector<Scope>>();
  validate(b);
  return b;
}

PlatformConfig platform_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  PlatformConfig c;
  try {
    c.seed = opt<std::uint64_t>(j, "seed", c.seed);
    c.gateway.secret = opt<std::string>(j, "secret", c.gateway.secret);
    c.gateway.operator_token = opt<std::string>(j, "operator_token", c.gateway.operator_token);
    if (j.contains("key_rate_limit")) c.gateway.key_rate_limit = rate_limit_from_json(j.at("key_rate_limit"));
    if (j.contains("data_dir")) c.data_dir = resolve(base_dir, j.at("data_dir").get<std::string>());
    c.coverage_floor = opt(j, "coverage_floor", c.coverage_floor);
    c.leaderboard_cache = opt_dur(j, "leaderboard_cache", c.leaderboard_cache);
    c.lookback_factor = opt(j, "lookback_factor", c.lookback_factor);

    for (const auto& pj : j.value("providers", Json::array())) {
      ProviderConfig pc;
      auto& d = pc.descriptor;
      d.name = pj.at("name").get<std::string>();
      const auto kind = opt<std::string>(pj, "kind", "synthetic");
      if (kind == "synthetic") {
        d.kind = ProviderKind::synthetic;
      } else if (kind == "http_stub") {
        d.kind = ProviderKind::http_stub;
      } else {
        throw Error(Errc::InvalidArgument, d.name + ": unknown provider kind '" + kind + "'");
      }
      if (pj.contains("rate_limit")) d.rate_limit = rate_limit_from_json(pj.at("rate_limit"));
      d.pull_interval = opt_dur(pj, "pull_interval", d.pull_interval);
      if (pj.contains("fixture")) pc.fixture = resolve(base_dir, pj.at("fixture").get<std::string>());
      for (const auto& sj : pj.at("series")) {
        SeriesId s;
        s.provider = d.name;
        s.external_id = sj.at("external_id").get<std::string>();
        s.domain = sj.at("domain").get<std::string>();
        s.subdomain = opt<std::string>(sj, "subdomain", "");
        s.native_frequency = Frequency::parse(opt<std::string>(sj, "frequency", "PT1H"));
        s.display_name = opt<std::string>(sj, "display_name", s.external_id);
        s.original_timezone = opt<std::string>(sj, "timezone", "UTC");
        if (!is_known_zone(s.original_timezone)) {
          throw Error(Errc::InvalidArgument, s.key() + ": unknown time zone " + s.original_timezone);
        }
        if (d.kind == ProviderKind::synthetic) {
          pc.synthetic.push_back(
              synthetic_spec_from_json(sj.value("synthetic", Json::object()), s, substream_seed(c.seed, s.key())));
        }
        if (sj.contains("staleness_threshold")) c.staleness_thresholds[s.key()] = dur_from(sj.at("staleness_threshold"));
        d.series_catalog.push_back(std::move(s));
      }
      validate(d);
      c.providers.push_back(std::move(pc));
    }

    if (j.contains("schedule")) {
      const auto& sj = j.at("schedule");
      c.schedule.planning_horizon = opt_dur(sj, "planning_horizon", c.schedule.planning_horizon);
      if (sj.contains("not_before")) c.schedule.not_before = ts_from(sj.at("not_before"));
      if (sj.contains("not_after")) c.schedule.not_after = ts_from(sj.at("not_after"));
      for (const auto& bj : sj.value("buckets", Json::array())) c.schedule.buckets.push_back(bucket_schedule_from_json(bj));
    }
    validate(c.schedule);

    for (const auto& bj : j.value("baselines", Json::array())) c.baselines.push_back(baseline_config_from_json(bj));
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("configuration: ") + e.what());
  }
  return c;
}

ServiceConfig service_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  ServiceConfig s;
  s.platform = platform_config_from_json(j, base_dir);
  try {
    if (j.contains("clock")) {
      const auto& cj = j.at("clock");
      s.clock.system = false;
      const auto mode = opt<std::string>(cj, "mode", "realtime");
      if (mode == "stepped") {
        s.clock.mode = VirtualClock::Mode::stepped;
      } else if (mode == "realtime") {
        s.clock.mode = VirtualClock::Mode::realtime;
      } else if (mode == "accelerated") {
        s.clock.mode = VirtualClock::Mode::accelerated;
      } else {
        throw Error(Errc::InvalidArgument, "unknown clock mode '" + mode + "'");
      }
      if (cj.contains("start")) s.clock.start = ts_from(cj.at("start"));
      s.clock.factor = opt(cj, "factor", s.clock.factor);
    }
    if (j.contains("server")) {
      const auto& sj = j.at("server");
      s.server.host = opt<std::string>(sj, "host", s.server.host);
      s.server.port = opt(sj, "port", s.server.port);
      s.server.tick_interval = opt_dur(sj, "tick_interval", s.server.tick_interval);
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("configuration: ") + e.what());
  }
  return s;
}

ServiceConfig load_service_config(const std::filesystem::path& file) {
  return service_config_from_json(read_json_file(file), file.parent_path());
}

}  // namespace arena
