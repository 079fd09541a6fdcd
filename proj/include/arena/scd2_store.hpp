#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "arena/clock.hpp"
#include "arena/domain.hpp"

namespace arena {

struct Provenance {
  std::string provider;
  std::string endpoint;
  Timestamp pull_time;

  bool operator==(const Provenance&) const = default;
};

/// One bitemporal fact. valid_from == created_at always; valid_to is the
/// transaction time at which a later version superseded this one.
struct VersionedObservation {
  std::string series;  // SeriesId::key()
  Timestamp event_time;
  double value = 0.0;
  Timestamp valid_from;
  std::optional<Timestamp> valid_to;
  Timestamp created_at;
  Provenance provenance;

  bool visible_at(Timestamp tx) const { return valid_from <= tx && (!valid_to || tx < *valid_to); }
  bool operator==(const VersionedObservation&) const = default;
};

struct AsOfView {
  std::string series;
  Timestamp tx_time;
  std::vector<Point> points;  // strictly increasing event_time; gaps are absent
};

enum class UpsertOutcome { inserted, superseded, noop };

/// Append-only SCD2 store: a line-delimited JSON record log plus an in-memory
/// index keyed by (series, event_time), rebuilt by replaying the log.
///
/// Writes are serialized and stamped with the injected clock; reads take a
/// shared lock and may run alongside the writer.
class Scd2Store {
 public:
  explicit Scd2Store(const Clock& clock, std::optional<std::filesystem::path> log_path = std::nullopt);
  ~Scd2Store();

  Scd2Store(const Scd2Store&) = delete;
  Scd2Store& operator=(const Scd2Store&) = delete;

  void register_series(const SeriesId& series);
  bool has_series(const std::string& key) const;
  SeriesId series(const std::string& key) const;
  std::vector<SeriesId> list_series() const;

  // tx_time is taken from the clock at admission.
  UpsertOutcome upsert(const std::string& series, Timestamp event_time, double value, const Provenance& provenance);

  // Explicit transaction time; the clock-stamped path and log replay both
  // route through here.
  UpsertOutcome upsert_at(const std::string& series, Timestamp event_time, double value, const Provenance& provenance,
                          Timestamp tx_time);

  // Points with event_time in [from, to] as visible at tx_time.
  AsOfView as_of(const std::string& series, Timestamp from, Timestamp to, Timestamp tx_time) const;

  std::optional<Timestamp> latest_event_time(const std::string& series, Timestamp tx_time) const;

  // Full version history of one key, in insertion order.
  std::vector<VersionedObservation> versions(const std::string& series, Timestamp event_time) const;

  // Every row of the store ordered by (series, event_time, valid_from).
  std::vector<VersionedObservation> rows() const;

  // fsync the record log; called once per ingestion batch.
  void flush();

  std::size_t version_count() const;

 private:
  struct SeriesData {
    SeriesId id;
    std::map<Timestamp, std::vector<VersionedObservation>> by_event;
  };

  void replay(const std::filesystem::path& path);
  UpsertOutcome apply_locked(const std::string& series, Timestamp event_time, double value,
                             const Provenance& provenance, Timestamp tx_time, bool log);
  void append_record(const std::string& line);
  const SeriesData& data_for(const std::string& key) const;

  const Clock& clock_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, SeriesData> series_;
  std::size_t versions_ = 0;

  struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };
  std::unique_ptr<std::FILE, FileCloser> log_;
};

std::string to_string(UpsertOutcome outcome);

}  // namespace arena
