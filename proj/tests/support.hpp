#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "arena/error.hpp"
#include "arena/gateway.hpp"
#include "arena/ingestion.hpp"
#include "arena/orchestrator.hpp"
#include "arena/scd2_store.hpp"
#include "arena/time.hpp"

#define CHECK_ERRC(expr, errc)                                        \
  do {                                                                \
    bool thrown_ = false;                                             \
    try {                                                             \
      (void)(expr);                                                   \
    } catch (const arena::Error& e_) {                                \
      thrown_ = true;                                                 \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());                  \
    }                                                                 \
    CHECK_MESSAGE(thrown_, "expected " << arena::to_string(errc));    \
  } while (0)

namespace testing {

inline arena::Timestamp at(const char* rfc3339) { return arena::parse_rfc3339(rfc3339); }
inline arena::Duration hours(long long h) { return arena::Duration{h * 3600}; }
inline arena::Duration minutes(long long m) { return arena::Duration{m * 60}; }

inline arena::SeriesId series(const std::string& id, const std::string& domain = "energy",
                              arena::Duration step = arena::Duration{3600}, const std::string& provider = "prov") {
  arena::SeriesId s;
  s.provider = provider;
  s.external_id = id;
  s.domain = domain;
  s.subdomain = "load";
  s.native_frequency = arena::Frequency(step);
  s.display_name = id;
  return s;
}

inline arena::Provenance prov(arena::Timestamp pull) { return arena::Provenance{"prov", "test", pull}; }

inline double rel_err(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("arena-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Store, ingestor, orchestrator and gateway on one stepped clock, with
/// points written straight into the store.
struct Rig {
  arena::VirtualClock clock;
  arena::Scd2Store store;
  arena::Ingestor ingestor;
  arena::Orchestrator orchestrator;
  arena::Gateway gateway;

  explicit Rig(arena::Timestamp start, arena::ScheduleConfig schedule = {}, arena::GatewayConfig gw = {})
      : clock(start),
        store(clock),
        ingestor(store),
        orchestrator(store, ingestor, std::move(schedule), gw.secret),
        gateway(clock, store, orchestrator, gw) {}

  void add_series(const arena::SeriesId& s) { store.register_series(s); }

  // Hourly points on [from, to] with value f(t), written at tx.
  template <class F>
  void fill(const std::string& key, arena::Timestamp from, arena::Timestamp to, F f, arena::Timestamp tx,
            arena::Duration step = arena::Duration{3600}) {
    for (auto t = from; t <= to; t += step) store.upsert_at(key, t, f(t), prov(tx), tx);
  }

  arena::ChallengeSpec spec(const std::string& id, arena::Timestamp t_p, int context, std::vector<std::string> fixed,
                            int k = 1) {
    arena::ChallengeSpec s;
    s.challenge_id = id;
    s.bucket = arena::BucketKey{"energy", arena::Frequency(arena::Duration{3600}), hours(24)};
    s.t_p = t_p;
    s.context_length = context;
    s.horizon_h = 24;
    s.selection.random = fixed.empty();
    s.selection.fixed_series = std::move(fixed);
    s.selection.k = s.selection.random ? k : static_cast<int>(s.selection.fixed_series.size());
    s.selection.seed = 42;
    s.registration_open_at = t_p - hours(1);
    s.announce_at = s.registration_open_at - hours(6);
    s.grace = hours(6);
    return s;
  }

  arena::ModelCardInput card(const std::string& name) {
    return arena::ModelCardInput{name, "statistical", "0", false, arena::ParticipationMode::byop};
  }
};

}  // namespace testing
