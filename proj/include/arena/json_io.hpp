#pragma once

// nlohmann/json adapters for the shared vocabulary types. Timestamps go over
// the wire as RFC 3339 strings and durations as ISO-8601.

#include <json.hpp>

#include "arena/domain.hpp"

namespace arena {

using Json = nlohmann::json;

inline Json ts_json(Timestamp t) { return format_rfc3339(t); }
inline Timestamp ts_from(const Json& j) { return parse_rfc3339(j.get<std::string>()); }
inline Json dur_json(Duration d) { return format_iso_duration(d); }
inline Duration dur_from(const Json& j) { return parse_iso_duration(j.get<std::string>()); }

void to_json(Json& j, const Frequency& f);
void from_json(const Json& j, Frequency& f);
void to_json(Json& j, const SeriesId& s);
void from_json(const Json& j, SeriesId& s);
void to_json(Json& j, const BucketKey& b);
void from_json(const Json& j, BucketKey& b);
void to_json(Json& j, const Scope& s);
void from_json(const Json& j, Scope& s);

// Shortest decimal text that round-trips the double exactly.
std::string decimal_repr(double v);

}  // namespace arena
