#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "arena/config.hpp"
#include "arena/platform.hpp"

namespace arena {

struct ScriptedParticipant {
  std::string name;
  ModelCardInput card;
};

/// One submission attempt by a scripted participant, timed relative to the
/// t_p of the n-th challenge (by t_p) of a bucket.
struct ScriptedAction {
  std::string name;
  std::string participant;
  std::size_t bucket = 0;
  int challenge_index = 0;
  Duration offset{-1800};  // may be negative
  int series = 1;          // aliases to submit for; <= 0 means all
  std::string forecast = "naive";  // naive | constant:<x>
  std::optional<int> length;       // override the number of values sent
};

struct ProviderOutage {
  std::string provider;
  Timestamp from;
  Timestamp to;
};

struct ScenarioAssertion {
  std::string name;
  std::string check;
  Json params;
};

struct ScenarioSpec {
  std::string name = "scenario";
  Timestamp start;
  Duration warmup{0};
  Duration duration{86400};
  std::optional<Duration> drain;  // default: longest horizon + grace + 1 day
  Duration tick{900};
  PlatformConfig platform;
  std::vector<ScriptedParticipant> participants;
  std::vector<ScriptedAction> actions;
  std::vector<ProviderOutage> outages;
  std::vector<ScenarioAssertion> assertions;
  std::vector<int> windows{7, 30, 90, 365};
};

// Throws ScenarioInvalid.
ScenarioSpec scenario_from_json(const Json& j, const std::filesystem::path& base_dir);
ScenarioSpec load_scenario(const std::filesystem::path& file);

struct ScenarioReport {
  Json json;
  std::vector<std::string> failed;  // names of failed assertions

  bool passed() const { return failed.empty(); }
};

// Drives the platform under a stepped clock from start - warmup until
// start + duration + drain. Deterministic: equal specs give equal reports.
ScenarioReport run_scenario(const ScenarioSpec& spec);

// Throws AssertionFailed naming the first failed assertion.
void require_passed(const ScenarioReport& report);

// Parses "-PT10M" and "+PT10M" as well as plain ISO durations.
Duration parse_signed_duration(std::string_view text);

}  // namespace arena
