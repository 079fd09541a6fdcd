#include "arena/time.hpp"

#include <absl/time/time.h>

#include <cctype>
#include <charconv>

#include "arena/error.hpp"

namespace arena {
namespace {

absl::Time to_absl(Timestamp t) { return absl::FromUnixSeconds(to_unix(t)); }

Timestamp from_absl(absl::Time t) { return from_unix(absl::ToUnixSeconds(t)); }

absl::TimeZone load_zone(const std::string& name) {
  absl::TimeZone tz;
  if (!absl::LoadTimeZone(name, &tz)) {
    throw Error(Errc::InvalidArgument, "unknown time zone '" + name + "'");
  }
  return tz;
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", to_absl(t), absl::UTCTimeZone());
}

Timestamp parse_rfc3339(std::string_view text) {
  absl::Time out;
  std::string err;
  if (!absl::ParseTime(absl::RFC3339_full, std::string(text), &out, &err)) {
    throw Error(Errc::ParseError, "bad RFC 3339 timestamp '" + std::string(text) + "': " + err);
  }
  // Sub-second input is truncated toward the past.
  return from_absl(absl::FromUnixSeconds(absl::ToUnixSeconds(out)));
}

std::string format_iso_duration(Duration d) {
  long long s = d.count();
  std::string out = s < 0 ? "-PT" : "PT";
  if (s < 0) s = -s;
  if (s == 0) return out + "0S";
  // Hours are never folded into days so bucket keys read "PT24H", not "P1D".
  if (s / 3600) out += std::to_string(s / 3600) + "H";
  if ((s % 3600) / 60) out += std::to_string((s % 3600) / 60) + "M";
  if (s % 60) out += std::to_string(s % 60) + "S";
  return out;
}

Duration parse_iso_duration(std::string_view text) {
  auto fail = [&] { return Error(Errc::ParseError, "bad ISO-8601 duration '" + std::string(text) + "'"); };
  std::string_view rest = text;
  bool negative = false;
  if (!rest.empty() && rest.front() == '-') {
    negative = true;
    rest.remove_prefix(1);
  }
  if (rest.empty() || rest.front() != 'P') throw fail();
  rest.remove_prefix(1);
  if (rest.empty()) throw fail();
  bool in_time = false;
  bool any = false;
  long long total = 0;
  while (!rest.empty()) {
    if (rest.front() == 'T') {
      if (in_time) throw fail();
      in_time = true;
      rest.remove_prefix(1);
      if (rest.empty()) throw fail();
      continue;
    }
    long long n = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
    if (ec != std::errc{} || ptr == rest.data()) throw fail();
    rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    if (rest.empty()) throw fail();
    char unit = rest.front();
    rest.remove_prefix(1);
    if (!in_time && unit == 'W') total += n * 7 * 86400;
    else if (!in_time && unit == 'D') total += n * 86400;
    else if (in_time && unit == 'H') total += n * 3600;
    else if (in_time && unit == 'M') total += n * 60;
    else if (in_time && unit == 'S') total += n;
    else throw fail();
    any = true;
  }
  if (!any) throw fail();
  return Duration{negative ? -total : total};
}

std::string format_in_zone(Timestamp t, const std::string& iana_zone) {
  return absl::FormatTime(absl::RFC3339_sec, to_absl(t), load_zone(iana_zone));
}

Timestamp parse_local_in_zone(std::string_view local, const std::string& iana_zone) {
  absl::TimeZone tz = load_zone(iana_zone);
  absl::Time out;
  std::string err;
  if (!absl::ParseTime("%Y-%m-%dT%H:%M:%S", std::string(local), tz, &out, &err)) {
    throw Error(Errc::ParseError, "bad local timestamp '" + std::string(local) + "': " + err);
  }
  return from_absl(out);
}

bool is_known_zone(const std::string& iana_zone) {
  absl::TimeZone tz;
  return absl::LoadTimeZone(iana_zone, &tz);
}

}  // namespace arena
