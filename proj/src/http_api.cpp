#include "arena/http_api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <cmath>
#include <limits>
#include <thread>

namespace arena {

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

Json parse_body(const HttpRequest& request) {
  auto j = Json::parse(request.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::ParseError, "request body must be a JSON object");
  return j;
}

HttpResponse error_response(const Error& e) {
  HttpResponse r;
  r.status = http_status(e.code());
  r.body = Json{{"error", std::string(to_string(e.code()))}, {"detail", e.detail()}};
  if (e.code() == Errc::RateLimited) {
    long long wait = 1;
    std::sscanf(e.detail().c_str(), "retry after %lld", &wait);
    r.headers["Retry-After"] = std::to_string(std::max(1LL, wait));
  }
  return r;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string HttpRequest::header(const std::string& name) const {
  auto it = headers.find(lower(name));
  return it == headers.end() ? std::string{} : it->second;
}

int http_status(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::InvalidArgument:
    case Errc::NonDivisible:
    case Errc::OffGrid:
    case Errc::MalformedRecord:
      return 400;
    case Errc::Unauthorized:
      return 401;
    case Errc::UnknownChallenge:
    case Errc::UnknownAlias:
    case Errc::UnknownModel:
    case Errc::UnknownSeries:
      return 404;
    case Errc::DeadlinePassed:
    case Errc::NotInRegistration:
    case Errc::StillInRegistration:
    case Errc::NotClosed:
    case Errc::ClockRegression:
      return 409;
    case Errc::MissingDisclosure:
    case Errc::WrongLength:
    case Errc::NonFiniteValue:
      return 422;
    case Errc::RateLimited:
      return 429;
    case Errc::ProviderUnavailable:
      return 503;
    default:
      return 500;
  }
}

Scope scope_from_query(const std::map<std::string, std::string>& query) {
  Scope s;
  if (auto it = query.find("domain"); it != query.end() && !it->second.empty()) s.domain = it->second;
  if (auto it = query.find("frequency"); it != query.end() && !it->second.empty()) {
    s.frequency = Frequency::parse(it->second);
  }
  if (auto it = query.find("horizon"); it != query.end() && !it->second.empty()) {
    s.horizon = parse_iso_duration(it->second);
  }
  return s;
}

HttpApi::HttpApi(Platform& platform, VirtualClock* stepped) : platform_(platform), stepped_(stepped) {}

HttpResponse HttpApi::handle(const HttpRequest& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(Errc::ParseError, e.what()));
  } catch (const std::exception& e) {
    spdlog::error("{} {}: {}", request.method, request.path, e.what());
    HttpResponse r;
    r.status = 500;
    r.body = Json{{"error", "Internal"}, {"detail", e.what()}};
    return r;
  }
}

HttpResponse HttpApi::route(const HttpRequest& request) {
  const auto parts = split_path(request.path);
  const auto& m = request.method;
  auto& gw = platform_.gateway();
  auto not_found = [&] {
    HttpResponse r;
    r.status = 404;
    r.body = Json{{"error", "NotFound"}, {"detail", request.method + " " + request.path}};
    return r;
  };
  if (parts.size() < 2 || parts[0] != "v1") return not_found();

  const auto& res = parts[1];
  if (res == "health" && parts.size() == 2 && m == "GET") {
    return HttpResponse{200, Json{{"status", "ok"}, {"now", ts_json(platform_.clock().now())}}, {}};
  }
  if (res == "models" && parts.size() == 2) {
    if (m == "POST") return register_model(request);
    if (m == "GET") return HttpResponse{200, Json(gw.list_models()), {}};
  }
  if (res == "challenges") {
    if (parts.size() == 2 && m == "GET") return list_challenges(request);
    if (parts.size() == 3 && m == "GET") return HttpResponse{200, Json(gw.challenge(parts[2])), {}};
    if (parts.size() == 4 && parts[3] == "scores" && m == "GET") {
      if (!platform_.orchestrator().contains(parts[2])) throw Error(Errc::UnknownChallenge, parts[2]);
      return HttpResponse{200, platform_.evaluator().report(parts[2]), {}};
    }
    if (parts.size() == 4 && parts[3] == "forecasts" && m == "POST") return submit(request, parts[2]);
    if (parts.size() == 5 && parts[3] == "context" && m == "GET") {
      return HttpResponse{200, Json(gw.get_context(request.header("X-Api-Key"), parts[2], parts[4])), {}};
    }
  }
  if (res == "leaderboard" && parts.size() == 2 && m == "GET") return leaderboard(request);
  if (res == "audit" && parts.size() == 3 && m == "GET") {
    return HttpResponse{200, Json(gw.audit_trail(request.header("X-Operator-Token"), parts[2])), {}};
  }
  if (res == "admin" && parts.size() == 3 && parts[2] == "advance" && m == "POST") return advance(request);
  return not_found();
}

HttpResponse HttpApi::register_model(const HttpRequest& request) {
  const auto j = parse_body(request);
  ModelCardInput in;
  in.declared_name_version = j.value("declared_name_version", "");
  in.architecture_class = j.value("architecture_class", "");
  in.approx_size = j.value("approx_size", "");
  if (j.contains("external_data_used") && !j.at("external_data_used").is_null()) {
    in.external_data_used = j.at("external_data_used").get<bool>();
  }
  in.mode = parse_mode(j.value("mode", "byop"));
  auto [card, key] = platform_.gateway().register_model(in);
  return HttpResponse{201, Json{{"model_id", card.model_id}, {"api_key", key.key}, {"model", card}}, {}};
}

HttpResponse HttpApi::list_challenges(const HttpRequest& request) {
  std::optional<Stage> state;
  if (auto it = request.query.find("state"); it != request.query.end() && !it->second.empty()) {
    state = parse_stage(it->second);
  }
  return HttpResponse{200, Json(platform_.gateway().list_challenges(state, scope_from_query(request.query))), {}};
}

HttpResponse HttpApi::submit(const HttpRequest& request, const std::string& challenge_id) {
  const auto j = parse_body(request);
  const auto alias = j.contains("alias") ? j.at("alias").get<std::string>() : j.value("series_alias", "");
  if (alias.empty()) throw Error(Errc::ParseError, "missing alias");
  if (!j.contains("values") || !j.at("values").is_array()) throw Error(Errc::ParseError, "values must be an array");
  std::vector<double> values;
  for (const auto& v : j.at("values")) {
    // JSON has no NaN/Inf; null or strings stand in for them and are rejected downstream.
    values.push_back(v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN());
  }
  const auto client_time = j.contains("client_submit_time") ? ts_from(j.at("client_submit_time")) : platform_.clock().now();
  std::optional<std::string> model_id;
  if (j.contains("model_id")) model_id = j.at("model_id").get<std::string>();
  const auto receipt = platform_.gateway().submit_forecast(request.header("X-Api-Key"), challenge_id, alias, values,
                                                           client_time, j.value("external_data_used", false), model_id);
  return HttpResponse{201, Json{{"received_at", ts_json(receipt.received_at)}, {"accepted", receipt.accepted}}, {}};
}

HttpResponse HttpApi::leaderboard(const HttpRequest& request) {
  auto it = request.query.find("window");
  const auto window = Window::parse(it == request.query.end() || it->second.empty() ? "30d" : it->second);
  const auto scope = scope_from_query(request.query);
  const auto entries = platform_.leaderboard(scope, window);
  return HttpResponse{
      200, Json{{"window", window.label()}, {"scope", scope}, {"as_of", ts_json(platform_.clock().now())}, {"entries", entries}}, {}};
}

HttpResponse HttpApi::advance(const HttpRequest& request) {
  if (!platform_.gateway().is_operator(request.header("X-Operator-Token"))) {
    throw Error(Errc::Unauthorized, "operator token required");
  }
  if (!stepped_) throw Error(Errc::InvalidArgument, "clock is not stepped");
  const auto j = parse_body(request);
  if (j.contains("to")) {
    stepped_->advance_to(ts_from(j.at("to")));
  } else {
    stepped_->advance(dur_from(j.at("by")));
  }
  const auto report = platform_.tick();
  return HttpResponse{200,
                      Json{{"now", ts_json(stepped_->now())},
                           {"created", report.created},
                           {"transitions", static_cast<int>(report.transitions.size())},
                           {"agent_submissions", report.agent_submissions},
                           {"finalized", report.finalized}},
                      {}};
}

void serve(HttpApi& api, Platform& platform, const std::string& host, int port, Duration tick_interval,
           std::stop_token stop) {
  httplib::Server server;
  auto adapt = [&api](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    for (const auto& [k, v] : req.headers) r.headers[lower(k)] = v;
    r.body = req.body;
    const auto out = api.handle(r);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", adapt);
  server.Post(R"(/.*)", adapt);

  std::jthread ticker([&platform, tick_interval](std::stop_token st) {
    Timestamp last = platform.clock().now() - tick_interval;
    while (!st.stop_requested()) {
      const auto now = platform.clock().now();
      if (now - last >= tick_interval) {
        try {
          platform.tick();
        } catch (const std::exception& e) {
          spdlog::error("tick failed: {}", e.what());
        }
        last = now;
      }
      std::this_thread::sleep_for(std::chrono::seconds(1));
    }
  });
  std::jthread stopper([&server, stop](std::stop_token own) {
    while (!stop.stop_requested() && !own.stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    server.stop();
  });
  spdlog::info("listening on {}:{}", host, port);
  if (!server.listen(host, port)) spdlog::error("cannot bind {}:{}", host, port);
  ticker.request_stop();
}

}  // namespace arena
