#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace arena {

/// UTC instant at second resolution. All arithmetic on the platform happens
/// on this type; local zones exist only for display and ingestion parsing.
using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

// RFC 3339 with an explicit "Z" offset, e.g. 2025-12-14T11:00:00Z.
std::string format_rfc3339(Timestamp t);
// Accepts any RFC 3339 offset ("Z", "+01:00", ...) and normalizes to UTC.
Timestamp parse_rfc3339(std::string_view text);

// ISO-8601 durations restricted to the day/time designators (P1D, PT15M, PT1H30M).
std::string format_iso_duration(Duration d);
Duration parse_iso_duration(std::string_view text);

// Renders t as wall-clock time in an IANA zone with its numeric offset,
// e.g. "2025-12-14T12:00:00+01:00" for Europe/Berlin.
std::string format_in_zone(Timestamp t, const std::string& iana_zone);

// Interprets a zone-less local stamp ("2025-12-14T12:00:00") in an IANA zone.
// Ambiguous wall times (DST fall-back) resolve to the earlier instant.
Timestamp parse_local_in_zone(std::string_view local, const std::string& iana_zone);

bool is_known_zone(const std::string& iana_zone);

inline Timestamp from_unix(long long seconds) { return Timestamp{Duration{seconds}}; }
inline long long to_unix(Timestamp t) { return t.time_since_epoch().count(); }

}  // namespace arena
