#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "arena/baselines.hpp"
#include "arena/clock.hpp"
#include "arena/evaluation.hpp"
#include "arena/gateway.hpp"
#include "arena/ingestion.hpp"
#include "arena/leaderboard.hpp"
#include "arena/orchestrator.hpp"
#include "arena/scd2_store.hpp"

namespace arena {

struct ProviderConfig {
  ProviderDescriptor descriptor;
  std::vector<SyntheticSeriesSpec> synthetic;      // kind == synthetic
  std::optional<std::filesystem::path> fixture;    // kind == http_stub
};

struct PlatformConfig {
  GatewayConfig gateway;
  ScheduleConfig schedule;
  std::vector<ProviderConfig> providers;
  std::vector<BaselineConfig> baselines;
  std::optional<std::filesystem::path> data_dir;
  double coverage_floor = 0.5;
  Duration leaderboard_cache{30};
  std::map<std::string, Duration> staleness_thresholds;
  int lookback_factor = 2;
  std::uint64_t seed = 0;
};

/// The whole service wired around one clock. tick() runs one deterministic
/// round: ingestion, orchestration, agents, evaluation, leaderboard refresh.
class Platform {
 public:
  struct TickReport {
    int polls = 0;
    int created = 0;
    std::vector<Transition> transitions;
    int agent_submissions = 0;
    int finalized = 0;
  };

  Platform(const Clock& clock, PlatformConfig config);
  ~Platform();

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  TickReport tick();

  std::vector<LeaderboardEntry> leaderboard(const Scope& scope, const Window& window);
  std::vector<ClosedChallenge> closed_challenges() const;
  std::vector<ModelEntry> model_entries() const;
  EvalInput eval_input(const Challenge& challenge) const;

  const Clock& clock() const { return clock_; }
  Scd2Store& store() { return *store_; }
  Ingestor& ingestor() { return *ingestor_; }
  IngestionScheduler& scheduler() { return *scheduler_; }
  Orchestrator& orchestrator() { return *orchestrator_; }
  Gateway& gateway() { return *gateway_; }
  Evaluator& evaluator() { return *evaluator_; }
  std::vector<BaselineAgent>& agents() { return agents_; }
  Provider& provider(const std::string& name);
  const PlatformConfig& config() const { return config_; }

 private:
  void open_journal();
  void replay_journal(const std::filesystem::path& path);
  void journal(const Json& record);
  int evaluate(Timestamp now);

  const Clock& clock_;
  PlatformConfig config_;
  std::unique_ptr<Scd2Store> store_;
  std::unique_ptr<Ingestor> ingestor_;
  std::unique_ptr<IngestionScheduler> scheduler_;
  std::map<std::string, std::unique_ptr<Provider>> providers_;
  std::unique_ptr<Orchestrator> orchestrator_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<Evaluator> evaluator_;
  std::vector<BaselineAgent> agents_;

  std::mutex tick_mutex_;
  std::mutex journal_mutex_;
  std::FILE* journal_file_ = nullptr;

  struct CacheEntry {
    Timestamp computed_at;
    std::uint64_t generation;
    std::vector<LeaderboardEntry> entries;
  };
  std::mutex cache_mutex_;
  std::map<std::string, CacheEntry> cache_;
};

}  // namespace arena
