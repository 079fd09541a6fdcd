#include "arena/sim.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "arena/error.hpp"

namespace arena {

namespace {

const std::set<std::string> kChecks{"closed_challenges",  "participation_rate",  "mean_raw_mase_less",
                                    "mean_raw_mase_below", "mean_raw_mase_above", "scripted_outcome",
                                    "no_leakage"};

ScriptedAction action_from_json(const Json& j) {
  ScriptedAction a;
  a.name = j.at("name").get<std::string>();
  a.participant = j.at("participant").get<std::string>();
  a.bucket = j.value("bucket", std::size_t{0});
  a.challenge_index = j.value("challenge_index", 0);
  if (j.contains("offset")) a.offset = parse_signed_duration(j.at("offset").get<std::string>());
  a.series = j.value("series", a.series);
  a.forecast = j.value("forecast", a.forecast);
  if (j.contains("length")) a.length = j.at("length").get<int>();
  return a;
}

// t_p of the index-th slot of a bucket at or after start.
Timestamp slot_t_p(const BucketSchedule& bucket, const ScheduleConfig& schedule, Timestamp start, int index) {
  ScheduleConfig probe = schedule;
  probe.not_before = start;
  probe.not_after.reset();
  probe.planning_horizon = Duration{(static_cast<long long>(index) / bucket.cadence_per_day + 2) * 86400};
  BucketSchedule b = bucket;
  b.fixed_series = {"probe"};
  const auto slots = plan_bucket(b, probe, start - Duration{1}, [](const BucketKey&) { return std::vector<SeriesId>{}; });
  if (index < 0 || static_cast<std::size_t>(index) >= slots.size()) {
    throw Error(Errc::ScenarioInvalid, "challenge_index " + std::to_string(index) + " out of range");
  }
  return slots[static_cast<std::size_t>(index)].t_p;
}

std::vector<double> scripted_values(const ScriptedAction& a, const std::optional<ContextPayload>& ctx, int h) {
  const int n = a.length.value_or(h);
  if (a.forecast.rfind("constant:", 0) == 0) return std::vector<double>(static_cast<std::size_t>(n), std::stod(a.forecast.substr(9)));
  double last = 0.0;
  if (ctx && !ctx->points.empty()) last = ctx->points.back().value;
  return std::vector<double>(static_cast<std::size_t>(n), last);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

}  // namespace

Duration parse_signed_duration(std::string_view text) {
  if (!text.empty() && text.front() == '-') return -parse_iso_duration(text.substr(1));
  if (!text.empty() && text.front() == '+') return parse_iso_duration(text.substr(1));
  return parse_iso_duration(text);
}

ScenarioSpec scenario_from_json(const Json& j, const std::filesystem::path& base_dir) {
  ScenarioSpec s;
  try {
    s.name = j.value("name", s.name);
    s.start = ts_from(j.at("start"));
    if (j.contains("warmup")) s.warmup = dur_from(j.at("warmup"));
    s.duration = dur_from(j.at("duration"));
    if (j.contains("drain")) s.drain = dur_from(j.at("drain"));
    if (j.contains("tick")) s.tick = dur_from(j.at("tick"));
    s.platform = platform_config_from_json(j.at("platform"), base_dir);
    for (const auto& pj : j.value("participants", Json::array())) {
      ScriptedParticipant p;
      p.name = pj.at("name").get<std::string>();
      const auto& cj = pj.at("card");
      p.card.declared_name_version = cj.value("declared_name_version", "");
      p.card.architecture_class = cj.value("architecture_class", "");
      p.card.approx_size = cj.value("approx_size", "");
      if (cj.contains("external_data_used")) p.card.external_data_used = cj.at("external_data_used").get<bool>();
      p.card.mode = parse_mode(cj.value("mode", "byop"));
      s.participants.push_back(std::move(p));
    }
    for (const auto& aj : j.value("actions", Json::array())) s.actions.push_back(action_from_json(aj));
    for (const auto& oj : j.value("outages", Json::array())) {
      s.outages.push_back(ProviderOutage{oj.at("provider").get<std::string>(), ts_from(oj.at("from")), ts_from(oj.at("to"))});
    }
    for (const auto& aj : j.value("assertions", Json::array())) {
      ScenarioAssertion a;
      a.check = aj.at("check").get<std::string>();
      a.name = aj.value("name", a.check);
      a.params = aj;
      s.assertions.push_back(std::move(a));
    }
    if (j.contains("windows")) s.windows = j.at("windows").get<std::vector<int>>();
  } catch (const Json::exception& e) {
    throw Error(Errc::ScenarioInvalid, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ScenarioInvalid) throw;
    throw Error(Errc::ScenarioInvalid, e.what());
  }

  if (s.duration.count() <= 0 || s.tick.count() <= 0 || s.warmup.count() < 0) {
    throw Error(Errc::ScenarioInvalid, "duration and tick must be positive, warmup non-negative");
  }
  if (s.drain && s.drain->count() < 0) throw Error(Errc::ScenarioInvalid, "drain must be non-negative");
  for (int w : s.windows) {
    try {
      Window::days(w);
    } catch (const Error& e) {
      throw Error(Errc::ScenarioInvalid, e.what());
    }
  }
  std::set<std::string> names;
  for (const auto& p : s.participants) {
    if (!names.insert(p.name).second) throw Error(Errc::ScenarioInvalid, "duplicate participant " + p.name);
  }
  for (const auto& a : s.actions) {
    if (!names.contains(a.participant)) throw Error(Errc::ScenarioInvalid, a.name + ": unknown participant " + a.participant);
    if (a.bucket >= s.platform.schedule.buckets.size()) throw Error(Errc::ScenarioInvalid, a.name + ": no such bucket");
  }
  for (const auto& a : s.assertions) {
    if (!kChecks.contains(a.check)) throw Error(Errc::ScenarioInvalid, "unknown check '" + a.check + "'");
  }
  if (!s.platform.schedule.not_before) s.platform.schedule.not_before = s.start;
  if (!s.platform.schedule.not_after) s.platform.schedule.not_after = s.start + s.duration;
  return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& file) {
  Json j;
  try {
    j = read_json_file(file);
  } catch (const Error& e) {
    throw Error(Errc::ScenarioInvalid, e.what());
  }
  return scenario_from_json(j, file.parent_path());
}

ScenarioReport run_scenario(const ScenarioSpec& spec) {
  Duration drain{86400};
  if (spec.drain) {
    drain = *spec.drain;
  } else {
    for (const auto& b : spec.platform.schedule.buckets) {
      drain = std::max(drain, b.bucket.horizon + b.grace_steps * b.bucket.frequency.step() + Duration{86400});
    }
  }
  const Timestamp begin = spec.start - spec.warmup;
  const Timestamp end = spec.start + spec.duration + drain;

  VirtualClock clock(begin, VirtualClock::Mode::stepped);
  Platform platform(clock, spec.platform);
  auto& gw = platform.gateway();

  for (const auto& o : spec.outages) {
    auto* synthetic = dynamic_cast<SyntheticProvider*>(&platform.provider(o.provider));
    if (!synthetic) throw Error(Errc::ScenarioInvalid, "outages apply to synthetic providers only");
    synthetic->add_outage(o.from, o.to);
  }

  std::map<std::string, ApiKey> keys;
  for (const auto& p : spec.participants) {
    try {
      keys.emplace(p.name, gw.register_model(p.card).second);
    } catch (const Error& e) {
      throw Error(Errc::ScenarioInvalid, p.name + ": " + e.what());
    }
  }

  struct Pending {
    Timestamp at;
    const ScriptedAction* action;
    std::string challenge_id;
  };
  std::vector<Pending> pending;
  for (const auto& a : spec.actions) {
    const auto& b = spec.platform.schedule.buckets[a.bucket];
    const Timestamp t_p = slot_t_p(b, spec.platform.schedule, spec.start, a.challenge_index);
    pending.push_back(Pending{t_p + a.offset, &a, challenge_id_for(b.bucket, t_p)});
  }
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& x, const Pending& y) { return x.at < y.at; });

  Json scripted = Json::array();
  auto run_action = [&](const Pending& p) {
    const auto& a = *p.action;
    const auto& key = keys.at(a.participant);
    Json rec{{"name", a.name}, {"participant", a.participant}, {"challenge_id", p.challenge_id}, {"at", ts_json(clock.now())}};
    if (!platform.orchestrator().contains(p.challenge_id)) {
      rec["outcome"] = "UnknownChallenge";
      scripted.push_back(rec);
      return;
    }
    const auto challenge = gw.challenge(p.challenge_id);
    const int n = a.series <= 0 ? static_cast<int>(challenge.aliases.size())
                                : std::min<int>(a.series, static_cast<int>(challenge.aliases.size()));
    Json results = Json::array();
    std::string outcome = "accepted";
    for (int i = 0; i < n; ++i) {
      const auto& alias = challenge.aliases[static_cast<std::size_t>(i)];
      std::optional<ContextPayload> ctx;
      try {
        ctx = gw.get_context(key.key, p.challenge_id, alias);
      } catch (const Error&) {
      }
      Json r{{"alias", alias}};
      try {
        const auto receipt = gw.submit_forecast(key.key, p.challenge_id, alias,
                                                scripted_values(a, ctx, challenge.spec.horizon_h), clock.now(), false);
        r["outcome"] = "accepted";
        r["received_at"] = ts_json(receipt.received_at);
      } catch (const Error& e) {
        r["outcome"] = std::string(to_string(e.code()));
        outcome = r["outcome"].get<std::string>();
      }
      results.push_back(r);
    }
    rec["outcome"] = outcome;
    rec["submissions"] = results;
    scripted.push_back(rec);
  };

  Timestamp next_tick = begin;
  std::size_t ai = 0;
  while (true) {
    const bool action_due = ai < pending.size() && pending[ai].at <= next_tick;
    const Timestamp next = action_due ? pending[ai].at : next_tick;
    if (next > end) break;
    if (next > clock.now()) clock.advance_to(next);
    if (action_due) {
      run_action(pending[ai++]);
    } else {
      platform.tick();
      next_tick += spec.tick;
    }
  }
  for (; ai < pending.size(); ++ai) {
    scripted.push_back(Json{{"name", pending[ai].action->name}, {"outcome", "NotRun"}});
  }

  // --- report ---
  const Timestamp now = clock.now();
  Json report;
  report["scenario"] = spec.name;
  report["start"] = ts_json(spec.start);
  report["end"] = ts_json(now);
  report["tick"] = dur_json(spec.tick);

  std::map<std::string, std::string> name_of;
  Json models = Json::array();
  for (const auto& m : gw.list_models()) {
    name_of[m.model_id] = m.declared_name_version;
    models.push_back(m);
  }
  report["models"] = models;

  Json challenges = Json::array();
  int closed = 0;
  auto& ev = platform.evaluator();
  for (const auto& c : platform.orchestrator().list()) {
    Json cj{{"challenge_id", c.spec.challenge_id},
            {"bucket", c.spec.bucket},
            {"t_p", ts_json(c.spec.t_p)},
            {"stage", to_string(c.state.stage)},
            {"finalized", ev.is_finalized(c.spec.challenge_id)}};
    if (c.state.closed_at) cj["closed_at"] = ts_json(*c.state.closed_at);
    Json series = Json::array();
    for (const auto& a : c.aliases) {
      Json sj{{"alias", a.alias}};
      if (a.revealed) sj["series"] = a.true_series;
      series.push_back(sj);
    }
    cj["series"] = series;
    cj["degenerate"] = ev.degenerate_series(c.spec.challenge_id);
    if (c.state.stage == Stage::closed) ++closed;
    challenges.push_back(cj);
  }
  report["challenges"] = challenges;
  report["closed_challenges"] = closed;

  auto scores = ev.all_challenge_scores();
  std::sort(scores.begin(), scores.end(), [](const ChallengeScore& a, const ChallengeScore& b) {
    return std::tie(a.challenge_id, a.model_id) < std::tie(b.challenge_id, b.model_id);
  });
  report["scores"] = scores;

  std::map<std::string, std::vector<double>> per_model;
  for (const auto& s : scores) per_model[s.model_id].push_back(s.aggregate_mase);
  std::map<std::string, double> mean_by_name;
  Json summary = Json::array();
  for (const auto& [model, values] : per_model) {
    const double m = mean(values);
    mean_by_name[name_of[model]] = m;
    summary.push_back(Json{{"model_id", model},
                           {"declared_name_version", name_of[model]},
                           {"challenges_scored", values.size()},
                           {"mean_raw_mase", m}});
  }
  report["model_summary"] = summary;

  Json boards = Json::object();
  std::map<std::string, std::vector<LeaderboardEntry>> board_of;
  for (int w : spec.windows) {
    const auto window = Window::days(w);
    auto entries = platform.leaderboard(Scope{}, window);
    boards[window.label()] = entries;
    board_of[window.label()] = std::move(entries);
  }
  report["leaderboards"] = boards;
  report["scripted"] = scripted;

  // --- assertions ---
  auto id_for = [&](const std::string& name) -> std::optional<std::string> {
    for (const auto& [id, n] : name_of) {
      if (n == name) return id;
    }
    return std::nullopt;
  };
  auto mean_of = [&](const std::string& name) {
    auto it = mean_by_name.find(name);
    return it == mean_by_name.end() ? std::nan("") : it->second;
  };

  ScenarioReport out;
  Json results = Json::array();
  for (const auto& a : spec.assertions) {
    const auto& p = a.params;
    bool ok = false;
    std::string detail;
    if (a.check == "closed_challenges") {
      ok = closed == p.at("equals").get<int>();
      detail = std::to_string(closed) + " closed";
    } else if (a.check == "participation_rate") {
      const auto name = p.at("model").get<std::string>();
      const auto label = Window::parse(p.value("window", "30d")).label();
      const auto id = id_for(name);
      const auto& board = board_of.contains(label)
                              ? board_of.at(label)
                              : (board_of[label] = platform.leaderboard(Scope{}, Window::parse(label)));
      auto it = std::find_if(board.begin(), board.end(), [&](const LeaderboardEntry& e) { return id && e.model_id == *id; });
      const double rate = it == board.end() ? 0.0 : it->participation_rate;
      ok = std::abs(rate - p.at("equals").get<double>()) <= p.value("tolerance", 0.0);
      detail = name + " rate " + decimal_repr(rate);
    } else if (a.check == "mean_raw_mase_less") {
      const double lo = mean_of(p.at("lower").get<std::string>());
      const double hi = mean_of(p.at("higher").get<std::string>());
      ok = lo < hi;
      detail = decimal_repr(lo) + " vs " + decimal_repr(hi);
    } else if (a.check == "mean_raw_mase_below" || a.check == "mean_raw_mase_above") {
      const double v = mean_of(p.at("model").get<std::string>());
      const double bound = p.at("value").get<double>();
      ok = a.check == "mean_raw_mase_below" ? v < bound : v > bound;
      detail = decimal_repr(v);
    } else if (a.check == "scripted_outcome") {
      const auto name = p.at("action").get<std::string>();
      std::string got = "missing";
      for (const auto& s : scripted) {
        if (s.at("name") == name) got = s.at("outcome").get<std::string>();
      }
      ok = got == p.at("equals").get<std::string>();
      detail = got;
    } else if (a.check == "no_leakage") {
      int violations = 0;
      int served = 0;
      for (const auto& c : platform.orchestrator().list()) {
        std::map<std::string, std::string> series_of;
        for (const auto& al : c.aliases) series_of[al.alias] = al.true_series;
        const auto step = c.spec.bucket.frequency.step();
        for (const auto& e : gw.audit_trail(spec.platform.gateway.operator_token, c.spec.challenge_id)) {
          if (e.kind == "submission_accepted" && e.server_time > c.spec.t_p) ++violations;
          if (e.kind != "context_served") continue;
          ++served;
          const auto view = platform.store().as_of(series_of.at(e.series_alias),
                                                   c.spec.t_p - (c.spec.context_length - 1) * step, c.spec.t_p,
                                                   e.server_time);
          const auto& pts = e.details.at("points");
          if (pts.size() != view.points.size()) ++violations;
          for (std::size_t i = 0; i < pts.size() && i < view.points.size(); ++i) {
            const auto t = ts_from(pts[i].at(0));
            if (t > c.spec.t_p || t != view.points[i].event_time || pts[i].at(1).get<double>() != view.points[i].value) {
              ++violations;
            }
          }
        }
      }
      ok = violations == 0;
      detail = std::to_string(violations) + " violations over " + std::to_string(served) + " payloads";
    }
    results.push_back(Json{{"name", a.name}, {"check", a.check}, {"passed", ok}, {"detail", detail}});
    if (!ok) out.failed.push_back(a.name);
  }
  report["assertions"] = results;
  report["passed"] = out.failed.empty();
  out.json = std::move(report);
  return out;
}

void require_passed(const ScenarioReport& report) {
  if (!report.passed()) throw Error(Errc::AssertionFailed, report.failed.front());
}

}  // namespace arena
