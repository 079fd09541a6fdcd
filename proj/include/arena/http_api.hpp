#pragma once

#include <map>
#include <string>

#include "arena/clock.hpp"
#include "arena/error.hpp"
#include "arena/json_io.hpp"
#include "arena/platform.hpp"

namespace arena {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;

  std::string header(const std::string& name) const;
};

struct HttpResponse {
  int status = 200;
  Json body;
  std::map<std::string, std::string> headers;
};

int http_status(Errc code);

/// The /v1 surface as a plain dispatcher over HttpRequest, so it can be
/// exercised without sockets. serve() binds it to a real listener.
class HttpApi {
 public:
  // `stepped` enables POST /v1/admin/advance.
  explicit HttpApi(Platform& platform, VirtualClock* stepped = nullptr);

  HttpResponse handle(const HttpRequest& request);

 private:
  HttpResponse route(const HttpRequest& request);
  HttpResponse register_model(const HttpRequest& request);
  HttpResponse list_challenges(const HttpRequest& request);
  HttpResponse submit(const HttpRequest& request, const std::string& challenge_id);
  HttpResponse leaderboard(const HttpRequest& request);
  HttpResponse advance(const HttpRequest& request);

  Platform& platform_;
  VirtualClock* stepped_;
};

Scope scope_from_query(const std::map<std::string, std::string>& query);

// Blocks until stop_requested. A background thread ticks the platform every
// tick_interval of platform time (polled once per wall-clock second).
void serve(HttpApi& api, Platform& platform, const std::string& host, int port, Duration tick_interval,
           std::stop_token stop);

}  // namespace arena
