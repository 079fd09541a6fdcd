#include "arena/baselines.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>

#include "arena/error.hpp"
#include "arena/evaluation.hpp"

namespace arena {

std::vector<double> forecast_naive(const ContextWindow& context, int h) {
  if (context.points.empty()) throw Error(Errc::EmptyContext, "naive forecast needs one observation");
  return std::vector<double>(static_cast<std::size_t>(h), context.points.back().value);
}

std::vector<double> forecast_moving_average(const ContextWindow& context, int w, int h) {
  if (w < 1) throw Error(Errc::InvalidArgument, "moving average window must be >= 1");
  if (context.points.empty()) throw Error(Errc::EmptyContext, "moving average needs one observation");
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(w), context.points.size());
  double sum = 0.0;
  for (auto it = context.points.end() - static_cast<std::ptrdiff_t>(n); it != context.points.end(); ++it) sum += it->value;
  return std::vector<double>(static_cast<std::size_t>(h), sum / static_cast<double>(n));
}

std::vector<double> forecast_seasonal_average(const ContextWindow& context, int m, int k, int h) {
  if (m < 1 || k < 1) throw Error(Errc::InvalidArgument, "seasonal average needs m >= 1 and k >= 1");
  if (context.points.empty()) throw Error(Errc::EmptyContext, "seasonal average needs observations");
  const auto step = context.frequency.step();
  const auto span = (context.t_p - context.points.front().event_time) / step + 1;
  if (span < m) {
    throw Error(Errc::InsufficientSeasonalHistory,
                "context spans " + std::to_string(span) + " steps, period is " + std::to_string(m));
  }

  auto position = [&](Timestamp t) {
    const long long idx = (t - context.t_p) / step;
    return static_cast<int>(((idx % m) + m) % m);
  };
  // Observed values per seasonal position, newest first.
  std::map<int, std::vector<double>> by_position;
  for (auto it = context.points.rbegin(); it != context.points.rend(); ++it) {
    auto& bucket = by_position[position(it->event_time)];
    if (static_cast<int>(bucket.size()) < k) bucket.push_back(it->value);
  }

  const double fallback = context.points.back().value;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(h));
  for (int i = 1; i <= h; ++i) {
    auto it = by_position.find(position(context.t_p + i * step));
    if (it == by_position.end()) {
      out.push_back(fallback);
      continue;
    }
    double sum = 0.0;
    for (double v : it->second) sum += v;
    out.push_back(sum / static_cast<double>(it->second.size()));
  }
  return out;
}

std::string to_string(BaselineConfig::Kind kind) {
  switch (kind) {
    case BaselineConfig::Kind::naive: return "naive";
    case BaselineConfig::Kind::moving_average: return "moving_average";
    case BaselineConfig::Kind::seasonal_average: return "seasonal_average";
  }
  return "unknown";
}

void validate(const BaselineConfig& config) {
  if (config.name.empty()) throw Error(Errc::InvalidArgument, "baseline needs a name");
  if (config.window < 1 || config.period < 0 || config.periods < 1) {
    throw Error(Errc::InvalidArgument, config.name + ": w, m and k must be >= 1");
  }
}

bool BaselineConfig::enrolls(const BucketKey& bucket) const {
  if (auto_enroll_scopes.empty()) return true;
  return std::any_of(auto_enroll_scopes.begin(), auto_enroll_scopes.end(),
                     [&](const Scope& s) { return s.matches(bucket); });
}

std::vector<double> BaselineConfig::forecast(const ContextWindow& context, int h) const {
  switch (kind) {
    case Kind::naive: return forecast_naive(context, h);
    case Kind::moving_average: return forecast_moving_average(context, window, h);
    case Kind::seasonal_average: {
      int m = period > 0 ? period : seasonal_period(context.frequency);
      return forecast_seasonal_average(context, m, periods, h);
    }
  }
  throw Error(Errc::InvalidArgument, "unknown baseline kind");
}

BaselineAgent::BaselineAgent(BaselineConfig config, Gateway& gateway) : config_(std::move(config)), gateway_(gateway) {
  validate(config_);
}

ModelCardInput BaselineAgent::card() const {
  std::string arch = to_string(config_.kind);
  if (config_.kind == BaselineConfig::Kind::moving_average) arch += "(w=" + std::to_string(config_.window) + ")";
  if (config_.kind == BaselineConfig::Kind::seasonal_average) {
    arch += "(m=" + std::to_string(config_.period) + ",k=" + std::to_string(config_.periods) + ")";
  }
  return ModelCardInput{"baseline/" + config_.name, "statistical:" + arch, "0 parameters", false,
                        ParticipationMode::containerized};
}

void BaselineAgent::attach(const std::optional<ApiKey>& existing) {
  key_ = existing ? *existing : gateway_.register_model(card()).second;
}

int BaselineAgent::tick(Timestamp now) {
  int accepted = 0;
  for (const auto& summary : gateway_.list_challenges(Stage::registration, Scope{})) {
    if (!config_.enrolls(summary.spec.bucket)) continue;
    const auto& id = summary.spec.challenge_id;
    for (const auto& alias : summary.aliases) {
      if (done_.contains({id, alias})) continue;
      try {
        const auto payload = gateway_.get_context(key_.key, id, alias);
        const auto values = config_.forecast(payload.window(), payload.horizon_h);
        gateway_.submit_forecast(key_.key, id, alias, values, now, false, key_.model_id);
        done_.emplace(id, alias);
        ++accepted;
      } catch (const Error& e) {
        if (e.code() == Errc::RateLimited) return accepted;
        spdlog::warn("baseline {} on {}/{}: {}", config_.name, id, alias, e.what());
        // Forecasting failures are not retried within a challenge.
        if (e.code() != Errc::NotInRegistration) done_.emplace(id, alias);
      }
    }
  }
  return accepted;
}

}  // namespace arena
