#include "arena/leaderboard.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "arena/error.hpp"

namespace arena {

Window Window::days(int d) {
  if (d != 7 && d != 30 && d != 90 && d != 365) {
    throw Error(Errc::InvalidArgument, "window must be one of 7d, 30d, 90d, 365d");
  }
  return Window(d);
}

Window Window::parse(std::string_view text) {
  if (text.size() < 2 || text.back() != 'd') throw Error(Errc::InvalidArgument, "bad window '" + std::string(text) + "'");
  int d = 0;
  for (char c : text.substr(0, text.size() - 1)) {
    if (c < '0' || c > '9') throw Error(Errc::InvalidArgument, "bad window '" + std::string(text) + "'");
    d = d * 10 + (c - '0');
  }
  return days(d);
}

double adjusted_mase(double raw_mase, int n_participated, int n_available) {
  if (n_participated <= 0 || n_available < n_participated) {
    throw Error(Errc::InvalidArgument, "participation must satisfy 0 < participated <= available");
  }
  if (n_participated == n_available) return raw_mase;
  return raw_mase * static_cast<double>(n_available) / static_cast<double>(n_participated);
}

namespace {

bool in_view(const ClosedChallenge& c, const Scope& scope, const Window& window, Timestamp now) {
  return scope.matches(c.bucket) && window.contains(c.closed_at, now);
}

}  // namespace

int availability(const ModelEntry& model, const Scope& scope, const Window& window, Timestamp now,
                 const std::vector<ClosedChallenge>& challenges) {
  return static_cast<int>(std::count_if(challenges.begin(), challenges.end(), [&](const ClosedChallenge& c) {
    return in_view(c, scope, window, now) && c.registration_open_at >= model.registered_at;
  }));
}

std::vector<LeaderboardEntry> compute_leaderboard(const Scope& scope, const Window& window, Timestamp now,
                                                  const std::vector<ClosedChallenge>& challenges,
                                                  const std::vector<ChallengeScore>& scores,
                                                  const std::vector<ModelEntry>& models) {
  std::map<std::string, const ClosedChallenge*> visible;
  for (const auto& c : challenges) {
    if (in_view(c, scope, window, now)) visible.emplace(c.challenge_id, &c);
  }

  std::vector<LeaderboardEntry> out;
  for (const auto& model : models) {
    std::set<std::string> available;
    for (const auto& [id, c] : visible) {
      if (c->registration_open_at >= model.registered_at) available.insert(id);
    }
    double sum = 0.0;
    int participated = 0;
    for (const auto& s : scores) {
      if (s.model_id != model.model_id || !visible.contains(s.challenge_id)) continue;
      sum += s.aggregate_mase;
      ++participated;
      // A model that entered a challenge it was not counted as eligible for
      // still had it available.
      available.insert(s.challenge_id);
    }
    if (participated == 0) continue;
    LeaderboardEntry e;
    e.model_id = model.model_id;
    e.raw_mase = sum / participated;
    e.n_participated = participated;
    e.n_available = static_cast<int>(available.size());
    e.participation_rate = static_cast<double>(participated) / static_cast<double>(e.n_available);
    e.adjusted_mase = adjusted_mase(e.raw_mase, participated, e.n_available);
    e.coverage_count = participated;
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.adjusted_mase != b.adjusted_mase) return a.adjusted_mase < b.adjusted_mase;
    if (a.coverage_count != b.coverage_count) return a.coverage_count > b.coverage_count;
    return a.model_id < b.model_id;
  });
  return out;
}

void to_json(Json& j, const LeaderboardEntry& e) {
  j = Json{{"model_id", e.model_id},
           {"raw_mase", e.raw_mase},
           {"adjusted_mase", e.adjusted_mase},
           {"participation_rate", e.participation_rate},
           {"coverage_count", e.coverage_count},
           {"n_participated", e.n_participated},
           {"n_available", e.n_available}};
}

}  // namespace arena
