#include "arena/json_io.hpp"

#include <array>
#include <charconv>

namespace arena {

void to_json(Json& j, const Frequency& f) { j = f.iso(); }
void from_json(const Json& j, Frequency& f) { f = Frequency::parse(j.get<std::string>()); }

void to_json(Json& j, const SeriesId& s) {
  j = Json{{"provider", s.provider},
           {"external_id", s.external_id},
           {"domain", s.domain},
           {"subdomain", s.subdomain},
           {"native_frequency", s.native_frequency},
           {"display_name", s.display_name},
           {"original_timezone", s.original_timezone}};
}

void from_json(const Json& j, SeriesId& s) {
  s.provider = j.at("provider").get<std::string>();
  s.external_id = j.at("external_id").get<std::string>();
  s.domain = j.value("domain", "");
  s.subdomain = j.value("subdomain", "");
  s.native_frequency = j.at("native_frequency").get<Frequency>();
  s.display_name = j.value("display_name", s.external_id);
  s.original_timezone = j.value("original_timezone", "UTC");
}

void to_json(Json& j, const BucketKey& b) {
  j = Json{{"domain", b.domain}, {"frequency", b.frequency}, {"horizon", dur_json(b.horizon)}};
}

void from_json(const Json& j, BucketKey& b) {
  b.domain = j.at("domain").get<std::string>();
  b.frequency = j.at("frequency").get<Frequency>();
  b.horizon = dur_from(j.at("horizon"));
}

void to_json(Json& j, const Scope& s) {
  j = Json::object();
  if (s.domain) j["domain"] = *s.domain;
  if (s.frequency) j["frequency"] = *s.frequency;
  if (s.horizon) j["horizon"] = dur_json(*s.horizon);
}

void from_json(const Json& j, Scope& s) {
  s = Scope{};
  if (j.contains("domain")) s.domain = j.at("domain").get<std::string>();
  if (j.contains("frequency")) s.frequency = j.at("frequency").get<Frequency>();
  if (j.contains("horizon")) s.horizon = dur_from(j.at("horizon"));
}

std::string decimal_repr(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace arena
