#include <algorithm>
#include <set>

#include "arena/baselines.hpp"
#include "arena/gateway.hpp"
#include "support.hpp"

using namespace arena;
using testing::at;
using testing::hours;
using testing::minutes;

namespace {

const auto kStart = at("2025-12-14T00:00:00Z");
const auto kTp = at("2025-12-14T11:00:00Z");

// One fixed-selection challenge on series prov/a with 48 hourly points of history.
struct Setup {
  testing::Rig rig;
  std::string key;
  std::string alias;

  explicit Setup(GatewayConfig gw = {}) : rig(kStart, {}, gw) {
    rig.add_series(testing::series("a"));
    rig.add_series(testing::series("b"));
    rig.fill("prov/a", kTp - hours(47), kStart, [](Timestamp t) { return double(t.time_since_epoch().count() % 997); },
             kStart);
    rig.fill("prov/b", kTp - hours(47), kStart, [](Timestamp) { return 2.0; }, kStart);
    const auto& c = rig.orchestrator.create(rig.spec("c", kTp, 24, {"prov/a", "prov/b"}), kStart);
    alias = c.aliases[0].alias;
    key = rig.gateway.register_model(rig.card("m1")).second.key;
  }

  void to(Timestamp t) { rig.clock.advance_to(t); }
  Receipt submit(std::vector<double> v) {
    return rig.gateway.submit_forecast(key, "c", alias, v, rig.clock.now(), false);
  }
};

}  // namespace

TEST_CASE("registration requires full disclosure") {
  testing::Rig rig(kStart);
  auto card = rig.card("m");
  auto [model, key] = rig.gateway.register_model(card);
  CHECK(model.model_id.size() > 0);
  CHECK(key.model_id == model.model_id);
  CHECK(model.registered_at == kStart);
  CHECK(rig.gateway.model(model.model_id) == model);
  CHECK(rig.gateway.key_for_model(model.model_id)->key == key.key);

  auto [other, other_key] = rig.gateway.register_model(rig.card("n"));
  CHECK(other.model_id != model.model_id);
  CHECK(other_key.key != key.key);
  CHECK(rig.gateway.list_models().size() == 2);

  auto missing = card;
  missing.declared_name_version.clear();
  CHECK_ERRC(rig.gateway.register_model(missing), Errc::MissingDisclosure);
  missing = card;
  missing.architecture_class.clear();
  CHECK_ERRC(rig.gateway.register_model(missing), Errc::MissingDisclosure);
  missing = card;
  missing.approx_size.clear();
  CHECK_ERRC(rig.gateway.register_model(missing), Errc::MissingDisclosure);
  missing = card;
  missing.external_data_used.reset();
  CHECK_ERRC(rig.gateway.register_model(missing), Errc::MissingDisclosure);
  CHECK(rig.gateway.list_models().size() == 2);
  CHECK_ERRC(rig.gateway.model("nope"), Errc::UnknownModel);
}

TEST_CASE("context serving") {
  Setup s;
  CHECK_ERRC(s.rig.gateway.get_context("bad", "c", s.alias), Errc::Unauthorized);
  CHECK_ERRC(s.rig.gateway.get_context(s.key, "c", s.alias), Errc::NotInRegistration);
  s.to(kTp - minutes(30));
  CHECK_ERRC(s.rig.gateway.get_context(s.key, "c", "s-unknown"), Errc::UnknownAlias);
  CHECK_ERRC(s.rig.gateway.get_context(s.key, "x", s.alias), Errc::UnknownChallenge);

  // Data written after kStart but before now is visible; future tx is not.
  s.rig.store.upsert_at("prov/a", kStart + hours(1), 5.0, testing::prov(kTp - hours(2)), kTp - hours(2));
  s.rig.store.upsert_at("prov/a", kTp - hours(1), 9.0, testing::prov(kTp - hours(2)), kTp - hours(2));
  const auto p = s.rig.gateway.get_context(s.key, "c", s.alias);
  CHECK(p.served_at == kTp - minutes(30));
  CHECK(p.horizon_h == 24);
  CHECK(p.t_p == kTp);
  CHECK(p.points.size() == 13 + 1 + 1);  // kTp-47h..kStart, kStart+1h, kTp-1h
  for (const auto& pt : p.points) {
    CHECK(pt.event_time <= kTp);
    CHECK(pt.event_time > kTp - hours(48));
  }
  CHECK(std::is_sorted(p.points.begin(), p.points.end(),
                       [](const Point& a, const Point& b) { return a.event_time < b.event_time; }));
  s.to(kTp + Duration{1});
  CHECK_ERRC(s.rig.gateway.get_context(s.key, "c", s.alias), Errc::NotInRegistration);
}

TEST_CASE("context window is bounded by the context length") {
  Setup s;
  s.to(kTp - minutes(5));
  s.rig.store.upsert_at("prov/a", kTp - hours(10), 1.0, testing::prov(kTp - hours(1)), kTp - hours(1));
  auto spec = s.rig.spec("short", kTp, 12, {"prov/a"});
  const auto& c = s.rig.orchestrator.create(spec, kStart);
  const auto p = s.rig.gateway.get_context(s.key, "short", c.aliases[0].alias);
  // Window is [t_p - 11h, t_p]; t_p - 11h is the last filled history point.
  REQUIRE(p.points.size() == 2);
  CHECK(p.points[0].event_time == kStart);
  CHECK(p.points[1].event_time == kTp - hours(10));
}

TEST_CASE("submission admission") {
  Setup s;
  const std::vector<double> ok(24, 1.0);
  CHECK_ERRC(s.submit(ok), Errc::NotInRegistration);
  s.to(kTp - minutes(10));
  CHECK_ERRC(s.submit(std::vector<double>(23, 1.0)), Errc::WrongLength);
  CHECK_ERRC(s.submit(std::vector<double>(25, 1.0)), Errc::WrongLength);
  auto bad = ok;
  bad[3] = std::nan("");
  CHECK_ERRC(s.submit(bad), Errc::NonFiniteValue);
  bad[3] = INFINITY;
  CHECK_ERRC(s.submit(bad), Errc::NonFiniteValue);
  CHECK_ERRC(s.rig.gateway.submit_forecast("bad", "c", s.alias, ok, kTp, false), Errc::Unauthorized);
  CHECK_ERRC(s.rig.gateway.submit_forecast(s.key, "c", s.alias, ok, kTp, false, std::string("other")),
             Errc::Unauthorized);
  CHECK_ERRC(s.rig.gateway.submit_forecast(s.key, "c", "s-zzz", ok, kTp, false), Errc::UnknownAlias);

  const auto r = s.submit(ok);
  CHECK(r.accepted);
  CHECK(r.received_at == kTp - minutes(10));

  // Replacement: latest accepted wins.
  s.to(kTp);
  const auto r2 = s.submit(std::vector<double>(24, 2.0));
  CHECK(r2.received_at == kTp);
  auto subs = s.rig.gateway.accepted_submissions("c");
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].values[0] == 2.0);
  CHECK(subs[0].received_at == kTp);

  s.to(kTp + Duration{1});
  CHECK_ERRC(s.submit(ok), Errc::DeadlinePassed);
  s.to(kTp + hours(2));
  CHECK_ERRC(s.submit(ok), Errc::DeadlinePassed);
  CHECK(s.rig.gateway.accepted_submissions("c")[0].values[0] == 2.0);
  auto ch = s.rig.orchestrator.get("c");
  CHECK(ch.state.participants.size() == 1);
}

TEST_CASE("client time is recorded but never trusted") {
  Setup s;
  s.to(kTp - hours(1) + Duration{1});
  const auto r =
      s.rig.gateway.submit_forecast(s.key, "c", s.alias, std::vector<double>(24, 1.0), kTp + hours(9), true);
  CHECK(r.received_at == kTp - hours(1) + Duration{1});
  const auto sub = s.rig.gateway.accepted_submissions("c").at(0);
  CHECK(sub.client_submit_time == kTp + hours(9));
  CHECK(sub.external_data_used);
  s.to(kTp + Duration{1});
  CHECK_ERRC(s.rig.gateway.submit_forecast(s.key, "c", s.alias, std::vector<double>(24, 3.0), kTp - hours(5), false),
             Errc::DeadlinePassed);
  CHECK(s.rig.gateway.accepted_submissions("c").at(0).values[0] == 1.0);
}

TEST_CASE("audit trail") {
  GatewayConfig gw;
  gw.operator_token = "op";
  Setup s(gw);
  s.to(kTp - minutes(20));
  s.rig.gateway.get_context(s.key, "c", s.alias);
  s.submit(std::vector<double>(24, 1.0));
  s.to(kTp + minutes(1));
  CHECK_ERRC(s.submit(std::vector<double>(24, 1.0)), Errc::DeadlinePassed);

  CHECK_ERRC(s.rig.gateway.audit_trail("nope", "c"), Errc::Unauthorized);
  const auto trail = s.rig.gateway.audit_trail("op", "c");
  REQUIRE(trail.size() == 3);
  CHECK(trail[0].kind == "context_served");
  CHECK(trail[1].kind == "submission_accepted");
  CHECK(trail[2].kind == "submission_rejected");
  CHECK(trail[2].details.at("error") == "DeadlinePassed");
  for (std::size_t i = 1; i < trail.size(); ++i) {
    CHECK(trail[i].seq > trail[i - 1].seq);
    CHECK(trail[i].server_time >= trail[i - 1].server_time);
  }
  CHECK(trail[0].details.at("points").size() == 13);
  CHECK(s.rig.gateway.audit_trail("op", "other").empty());
}

TEST_CASE("per-key rate limit") {
  GatewayConfig gw;
  gw.key_rate_limit = RateLimit{3, Duration{60}};
  Setup s(gw);
  s.to(kTp - minutes(30));
  for (int i = 0; i < 3; ++i) s.rig.gateway.get_context(s.key, "c", s.alias);
  CHECK_ERRC(s.rig.gateway.get_context(s.key, "c", s.alias), Errc::RateLimited);
  CHECK_ERRC(s.submit(std::vector<double>(24, 1.0)), Errc::RateLimited);
  // Another key is unaffected.
  const auto other = s.rig.gateway.register_model(s.rig.card("m2")).second.key;
  CHECK_NOTHROW(s.rig.gateway.get_context(other, "c", s.alias));
  s.rig.clock.advance(Duration{60});
  CHECK_NOTHROW(s.rig.gateway.get_context(s.key, "c", s.alias));
}

TEST_CASE("challenge listing") {
  Setup s;
  auto summaries = s.rig.gateway.list_challenges(std::nullopt, Scope{});
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].stage == Stage::announced);
  CHECK(summaries[0].aliases.size() == 2);
  CHECK(s.rig.gateway.list_challenges(Stage::registration, Scope{}).empty());
  s.to(kTp - minutes(1));
  CHECK(s.rig.gateway.list_challenges(Stage::registration, Scope{}).size() == 1);
  Scope other;
  other.domain = "weather";
  CHECK(s.rig.gateway.list_challenges(std::nullopt, other).empty());
  CHECK(s.rig.gateway.challenge("c").stage == Stage::registration);
  CHECK_ERRC(s.rig.gateway.challenge("x"), Errc::UnknownChallenge);
}

TEST_CASE("random selections stay hidden until active") {
  testing::Rig rig(kStart);
  for (const char* id : {"a", "b", "c", "d", "e"}) {
    rig.add_series(testing::series(id));
    rig.fill(std::string("prov/") + id, kStart - hours(5), kStart, [](Timestamp) { return 1.0; }, kStart);
  }
  rig.orchestrator.create(rig.spec("r", kTp, 24, {}, 3), kStart);
  const auto hidden = rig.gateway.challenge("r");
  CHECK(hidden.revealed.empty());
  const auto text = Json(hidden).dump();
  for (const char* id : {"prov/a", "prov/b", "prov/c", "prov/d", "prov/e"}) CHECK(text.find(id) == std::string::npos);
  rig.clock.advance_to(kTp - minutes(1));
  CHECK(rig.gateway.challenge("r").revealed.empty());
  rig.clock.advance_to(kTp + minutes(1));
  const auto shown = rig.gateway.challenge("r");
  CHECK(shown.stage == Stage::active);
  CHECK(shown.revealed.size() == 3);
}

TEST_CASE("baseline agents see the same payload as external clients") {
  Setup s;
  BaselineConfig bc;
  bc.name = "naive";
  BaselineAgent agent(bc, s.rig.gateway);
  agent.attach();
  s.to(kTp - minutes(30));
  CHECK(agent.tick(s.rig.clock.now()) == 2);
  CHECK(agent.tick(s.rig.clock.now()) == 0);
  const auto mine = s.rig.gateway.get_context(s.key, "c", s.alias);

  const auto trail = s.rig.gateway.audit_trail("operator", "c");
  bool found = false;
  for (const auto& e : trail) {
    if (e.kind != "context_served" || e.model_id != agent.model_id() || e.series_alias != s.alias) continue;
    found = true;
    const auto& pts = e.details.at("points");
    REQUIRE(pts.size() == mine.points.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(ts_from(pts[i][0]) == mine.points[i].event_time);
      CHECK(pts[i][1].get<double>() == mine.points[i].value);
    }
  }
  CHECK(found);
  const auto subs = s.rig.gateway.accepted_submissions("c");
  CHECK(subs.size() == 2);
  const auto naive = forecast_naive(mine.window(), 24);
  for (const auto& sub : subs) {
    if (sub.series_alias == s.alias) CHECK(sub.values == naive);
  }
}

TEST_CASE("concurrent submissions near the deadline") {
  Setup s;
  s.to(kTp);
  std::vector<std::string> keys;
  for (int i = 0; i < 8; ++i) keys.push_back(s.rig.gateway.register_model(s.rig.card("p" + std::to_string(i))).second.key);
  std::vector<std::thread> threads;
  std::atomic<int> accepted{0};
  for (const auto& k : keys) {
    threads.emplace_back([&, k] {
      for (int i = 0; i < 5; ++i) {
        try {
          s.rig.gateway.submit_forecast(k, "c", s.alias, std::vector<double>(24, 1.0), kTp, false);
          ++accepted;
        } catch (const Error&) {
        }
      }
    });
  }
  s.rig.clock.advance(Duration{1});
  for (auto& t : threads) t.join();
  for (const auto& sub : s.rig.gateway.accepted_submissions("c")) CHECK(sub.received_at <= kTp);
  CHECK(static_cast<int>(s.rig.gateway.accepted_submissions("c").size()) <= 8);
}
