#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arena/domain.hpp"
#include "arena/evaluation.hpp"
#include "arena/json_io.hpp"

namespace arena {

/// Rolling window anchored at the query time: (now - length, now].
class Window {
 public:
  static Window days(int d);
  // "7d", "30d", "90d", "365d"
  static Window parse(std::string_view text);

  int length_days() const noexcept { return days_; }
  Duration length() const noexcept { return Duration{static_cast<long long>(days_) * 86400}; }
  bool contains(Timestamp closed_at, Timestamp now) const { return closed_at > now - length() && closed_at <= now; }
  std::string label() const { return std::to_string(days_) + "d"; }

 private:
  explicit Window(int days) : days_(days) {}
  int days_;
};

// Closed challenges as the leaderboard sees them.
struct ClosedChallenge {
  std::string challenge_id;
  BucketKey bucket;
  Timestamp registration_open_at;
  Timestamp closed_at;
};

struct ModelEntry {
  std::string model_id;
  Timestamp registered_at;
};

struct LeaderboardEntry {
  std::string model_id;
  double raw_mase = 0.0;
  int n_participated = 0;
  int n_available = 0;
  double participation_rate = 0.0;
  double adjusted_mase = 0.0;
  int coverage_count = 0;

  bool operator==(const LeaderboardEntry&) const = default;
};

// MASE divided by participation rate, written as raw * available / participated
// so that rate 1 returns raw bit-for-bit.
double adjusted_mase(double raw_mase, int n_participated, int n_available);

// In-window, in-scope closed challenges whose registration opened at or
// after the model registered.
int availability(const ModelEntry& model, const Scope& scope, const Window& window, Timestamp now,
                 const std::vector<ClosedChallenge>& challenges);

// Ranked ascending by adjusted MASE, then higher coverage, then model_id.
std::vector<LeaderboardEntry> compute_leaderboard(const Scope& scope, const Window& window, Timestamp now,
                                                  const std::vector<ClosedChallenge>& challenges,
                                                  const std::vector<ChallengeScore>& scores,
                                                  const std::vector<ModelEntry>& models);

void to_json(Json& j, const LeaderboardEntry& e);

}  // namespace arena
