#include "arena/scd2_store.hpp"

#include <fstream>
#include <mutex>
#include <unistd.h>

#include "arena/error.hpp"
#include "arena/json_io.hpp"

namespace arena {

std::string to_string(UpsertOutcome outcome) {
  switch (outcome) {
    case UpsertOutcome::inserted: return "inserted";
    case UpsertOutcome::superseded: return "superseded";
    case UpsertOutcome::noop: return "noop";
  }
  return "unknown";
}

namespace {

Json insert_record(const VersionedObservation& v) {
  return Json{{"op", "insert"},
              {"series", v.series},
              {"event_time", ts_json(v.event_time)},
              {"value", v.value},
              {"valid_from", ts_json(v.valid_from)},
              {"valid_to", nullptr},
              {"created_at", ts_json(v.created_at)},
              {"provider", v.provenance.provider},
              {"endpoint", v.provenance.endpoint},
              {"pull_time", ts_json(v.provenance.pull_time)}};
}

}  // namespace

Scd2Store::Scd2Store(const Clock& clock, std::optional<std::filesystem::path> log_path) : clock_(clock) {
  if (!log_path) return;
  if (std::filesystem::exists(*log_path)) replay(*log_path);
  log_.reset(std::fopen(log_path->c_str(), "a"));
  if (!log_) throw Error(Errc::InvalidArgument, "cannot open store log " + log_path->string());
}

Scd2Store::~Scd2Store() {
  if (log_) flush();
}

void Scd2Store::replay(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::uintmax_t> torn_at;
  for (auto offset = in.tellg(); std::getline(in, line); offset = in.tellg()) {
    ++lineno;
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception&) {
      // A torn final record from a crash mid-write is dropped; anything
      // earlier is corruption.
      if (in.peek() == EOF) {
        torn_at = static_cast<std::uintmax_t>(offset);
        break;
      }
      throw Error(Errc::ParseError, path.string() + ":" + std::to_string(lineno) + " unreadable record");
    }
    const auto op = rec.at("op").get<std::string>();
    if (op == "series") {
      auto id = rec.at("id").get<SeriesId>();
      series_.try_emplace(id.key(), SeriesData{id, {}});
    } else if (op == "insert") {
      VersionedObservation v;
      v.series = rec.at("series").get<std::string>();
      v.event_time = ts_from(rec.at("event_time"));
      v.value = rec.at("value").get<double>();
      v.valid_from = ts_from(rec.at("valid_from"));
      v.created_at = ts_from(rec.at("created_at"));
      v.provenance = Provenance{rec.at("provider").get<std::string>(), rec.at("endpoint").get<std::string>(),
                                ts_from(rec.at("pull_time"))};
      auto& data = series_.at(v.series);
      data.by_event[v.event_time].push_back(std::move(v));
      ++versions_;
    } else if (op == "close") {
      auto& chain = series_.at(rec.at("series").get<std::string>()).by_event.at(ts_from(rec.at("event_time")));
      chain.back().valid_to = ts_from(rec.at("valid_to"));
    } else {
      throw Error(Errc::ParseError, path.string() + ":" + std::to_string(lineno) + " unknown op '" + op + "'");
    }
  }
  in.close();
  // Cut the torn tail so that later appends start on a fresh line.
  if (torn_at) std::filesystem::resize_file(path, *torn_at);
}

void Scd2Store::append_record(const std::string& line) {
  if (!log_) return;
  std::fputs(line.c_str(), log_.get());
  std::fputc('\n', log_.get());
}

void Scd2Store::flush() {
  std::unique_lock lock(mutex_);
  if (!log_) return;
  std::fflush(log_.get());
  ::fsync(::fileno(log_.get()));
}

void Scd2Store::register_series(const SeriesId& series) {
  std::unique_lock lock(mutex_);
  auto [it, fresh] = series_.try_emplace(series.key(), SeriesData{series, {}});
  if (fresh) append_record(Json{{"op", "series"}, {"id", series}}.dump());
}

bool Scd2Store::has_series(const std::string& key) const {
  std::shared_lock lock(mutex_);
  return series_.contains(key);
}

const Scd2Store::SeriesData& Scd2Store::data_for(const std::string& key) const {
  auto it = series_.find(key);
  if (it == series_.end()) throw Error(Errc::UnknownSeries, key);
  return it->second;
}

SeriesId Scd2Store::series(const std::string& key) const {
  std::shared_lock lock(mutex_);
  return data_for(key).id;
}

std::vector<SeriesId> Scd2Store::list_series() const {
  std::shared_lock lock(mutex_);
  std::vector<SeriesId> out;
  for (const auto& [key, data] : series_) out.push_back(data.id);
  return out;
}

UpsertOutcome Scd2Store::upsert(const std::string& series, Timestamp event_time, double value,
                                const Provenance& provenance) {
  std::unique_lock lock(mutex_);
  // The clock read happens under the writer lock so tx_time is monotone in
  // admission order.
  return apply_locked(series, event_time, value, provenance, clock_.now(), true);
}

UpsertOutcome Scd2Store::upsert_at(const std::string& series, Timestamp event_time, double value,
                                   const Provenance& provenance, Timestamp tx_time) {
  std::unique_lock lock(mutex_);
  return apply_locked(series, event_time, value, provenance, tx_time, true);
}

UpsertOutcome Scd2Store::apply_locked(const std::string& series, Timestamp event_time, double value,
                                      const Provenance& provenance, Timestamp tx_time, bool log) {
  auto it = series_.find(series);
  if (it == series_.end()) throw Error(Errc::UnknownSeries, series);
  auto& chain = it->second.by_event[event_time];

  VersionedObservation fresh{series, event_time, value, tx_time, std::nullopt, tx_time, provenance};
  if (chain.empty()) {
    if (log) append_record(insert_record(fresh).dump());
    chain.push_back(std::move(fresh));
    ++versions_;
    return UpsertOutcome::inserted;
  }

  auto& current = chain.back();
  if (tx_time < current.valid_from) {
    throw Error(Errc::ClockRegression, series + "@" + format_rfc3339(event_time) + ": tx " + format_rfc3339(tx_time) +
                                           " precedes current version " + format_rfc3339(current.valid_from));
  }
  if (decimal_repr(current.value) == decimal_repr(value)) return UpsertOutcome::noop;
  if (tx_time == current.valid_from) {
    throw Error(Errc::ClockRegression, series + "@" + format_rfc3339(event_time) +
                                           ": correction shares the tx of the version it would supersede");
  }

  current.valid_to = tx_time;
  if (log) {
    append_record(Json{{"op", "close"},
                       {"series", series},
                       {"event_time", ts_json(event_time)},
                       {"valid_to", ts_json(tx_time)}}
                      .dump());
    append_record(insert_record(fresh).dump());
  }
  chain.push_back(std::move(fresh));
  ++versions_;
  return UpsertOutcome::superseded;
}

AsOfView Scd2Store::as_of(const std::string& series, Timestamp from, Timestamp to, Timestamp tx_time) const {
  std::shared_lock lock(mutex_);
  const auto& data = data_for(series);
  AsOfView view{series, tx_time, {}};
  if (to < from) return view;
  for (auto it = data.by_event.lower_bound(from); it != data.by_event.end() && it->first <= to; ++it) {
    const auto& chain = it->second;
    // Versions are ordered by valid_from; the visible one is the last whose
    // valid_from <= tx, provided it was not closed at or before tx.
    auto pos = std::upper_bound(chain.begin(), chain.end(), tx_time,
                                [](Timestamp tx, const VersionedObservation& v) { return tx < v.valid_from; });
    if (pos == chain.begin()) continue;
    const auto& v = *std::prev(pos);
    if (v.visible_at(tx_time)) view.points.push_back(Point{it->first, v.value});
  }
  return view;
}

std::optional<Timestamp> Scd2Store::latest_event_time(const std::string& series, Timestamp tx_time) const {
  std::shared_lock lock(mutex_);
  const auto& data = data_for(series);
  for (auto it = data.by_event.rbegin(); it != data.by_event.rend(); ++it) {
    for (const auto& v : it->second) {
      if (v.visible_at(tx_time)) return it->first;
    }
  }
  return std::nullopt;
}

std::vector<VersionedObservation> Scd2Store::versions(const std::string& series, Timestamp event_time) const {
  std::shared_lock lock(mutex_);
  const auto& data = data_for(series);
  auto it = data.by_event.find(event_time);
  if (it == data.by_event.end()) return {};
  return it->second;
}

std::vector<VersionedObservation> Scd2Store::rows() const {
  std::shared_lock lock(mutex_);
  std::vector<VersionedObservation> out;
  out.reserve(versions_);
  for (const auto& [key, data] : series_) {
    for (const auto& [t, chain] : data.by_event) out.insert(out.end(), chain.begin(), chain.end());
  }
  return out;
}

std::size_t Scd2Store::version_count() const {
  std::shared_lock lock(mutex_);
  return versions_;
}

}  // namespace arena
