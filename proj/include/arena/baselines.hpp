#pragma once

#include <set>
#include <string>
#include <vector>

#include "arena/domain.hpp"
#include "arena/gateway.hpp"

namespace arena {

// Statistical baselines. Each takes the served context (gaps absent) and
// returns h point forecasts; none of them imputes missing values.

// Last observed value repeated. Throws EmptyContext.
std::vector<double> forecast_naive(const ContextWindow& context, int h);

// Mean of the last min(w, available) observed values. Throws EmptyContext.
std::vector<double> forecast_moving_average(const ContextWindow& context, int w, int h);

// Step i takes the mean of the last <= k observed values sharing its
// seasonal position (grid index mod m); positions never observed fall back
// to the naive value. Throws InsufficientSeasonalHistory when the context
// spans less than one full period.
std::vector<double> forecast_seasonal_average(const ContextWindow& context, int m, int k, int h);

struct BaselineConfig {
  enum class Kind { naive, moving_average, seasonal_average };

  std::string name;
  Kind kind = Kind::naive;
  int window = 24;  // moving_average
  int period = 0;   // seasonal_average; 0 = follow the scorer's period for the frequency
  int periods = 4;  // seasonal_average
  std::vector<Scope> auto_enroll_scopes;  // empty = every challenge

  bool enrolls(const BucketKey& bucket) const;
  std::vector<double> forecast(const ContextWindow& context, int h) const;
};

void validate(const BaselineConfig& config);
std::string to_string(BaselineConfig::Kind kind);

/// In-process participant that goes through the same gateway calls as any
/// external client.
class BaselineAgent {
 public:
  BaselineAgent(BaselineConfig config, Gateway& gateway);

  // Registers the model card unless `existing` already names this agent's key.
  void attach(const std::optional<ApiKey>& existing = std::nullopt);

  // Handles every enrolled challenge in registration; returns the number of
  // accepted submissions this tick.
  int tick(Timestamp now);

  const std::string& model_id() const { return key_.model_id; }
  const BaselineConfig& config() const { return config_; }
  ModelCardInput card() const;

 private:
  BaselineConfig config_;
  Gateway& gateway_;
  ApiKey key_;
  std::set<std::pair<std::string, std::string>> done_;  // (challenge, alias)
};

}  // namespace arena
