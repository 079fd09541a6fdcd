#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "arena/config.hpp"
#include "arena/error.hpp"
#include "arena/http_api.hpp"
#include "arena/sim.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::string config_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("ARENA_CONFIG")) return env;
  return {};
}

std::string base_url(const std::string& flag, const std::string& config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("ARENA_URL")) return env;
  const auto path = config_path(config);
  if (!path.empty()) {
    const auto c = arena::load_service_config(path);
    return "http://" + c.server.host + ":" + std::to_string(c.server.port);
  }
  return "http://127.0.0.1:8080";
}

arena::Json http_get(const std::string& url, const std::string& path, const httplib::Params& params) {
  httplib::Client client(url);
  client.set_connection_timeout(5);
  auto res = client.Get(path, params, httplib::Headers{});
  if (!res) throw std::runtime_error("cannot reach " + url + ": " + httplib::to_string(res.error()));
  auto body = arena::Json::parse(res->body, nullptr, false);
  if (res->status >= 400) {
    const std::string detail = body.is_object() ? body.value("error", "") + ": " + body.value("detail", "") : res->body;
    throw std::runtime_error("HTTP " + std::to_string(res->status) + " " + detail);
  }
  if (body.is_discarded()) throw std::runtime_error("unreadable response from " + url);
  return body;
}

int serve(const std::string& config_flag) {
  const auto path = config_path(config_flag);
  if (path.empty()) throw CLI::RequiredError("--config (or ARENA_CONFIG)");
  auto cfg = arena::load_service_config(path);

  std::unique_ptr<arena::Clock> clock;
  arena::VirtualClock* stepped = nullptr;
  if (cfg.clock.system) {
    clock = std::make_unique<arena::SystemClock>();
  } else {
    const auto start = cfg.clock.start.value_or(arena::SystemClock{}.now());
    auto vc = std::make_unique<arena::VirtualClock>(start, cfg.clock.mode, cfg.clock.factor);
    if (cfg.clock.mode == arena::VirtualClock::Mode::stepped) stepped = vc.get();
    clock = std::move(vc);
  }

  arena::Platform platform(*clock, cfg.platform);
  arena::HttpApi api(platform, stepped);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::jthread server([&](std::stop_token st) {
    arena::serve(api, platform, cfg.server.host, cfg.server.port, cfg.server.tick_interval, st);
  });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  spdlog::info("shutting down");
  server.request_stop();
  return 0;
}

int sim_run(const std::string& file, const std::string& report_path) {
  const auto spec = arena::load_scenario(file);
  const auto report = arena::run_scenario(spec);
  const auto text = report.json.dump(2) + "\n";
  if (report_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    out << text;
  }
  std::cerr << spec.name << ": " << report.json.at("closed_challenges").get<int>() << " closed challenges\n";
  for (const auto& a : report.json.at("assertions")) {
    std::cerr << (a.at("passed").get<bool>() ? "  ok    " : "  FAIL  ") << a.at("name").get<std::string>() << " ("
              << a.at("detail").get<std::string>() << ")\n";
  }
  arena::require_passed(report);
  return 0;
}

void print_leaderboard(const arena::Json& body) {
  std::printf("window %s  as of %s\n", body.at("window").get<std::string>().c_str(), body.at("as_of").get<std::string>().c_str());
  std::printf("%-4s %-12s %12s %12s %8s %9s %9s\n", "rank", "model", "adj_mase", "raw_mase", "rate", "coverage", "available");
  int rank = 1;
  for (const auto& e : body.at("entries")) {
    std::printf("%-4d %-12s %12.6f %12.6f %8.3f %9d %9d\n", rank++, e.at("model_id").get<std::string>().c_str(),
                e.at("adjusted_mase").get<double>(), e.at("raw_mase").get<double>(),
                e.at("participation_rate").get<double>(), e.at("coverage_count").get<int>(),
                e.at("n_available").get<int>());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arena: live forecasting challenges"};
  app.require_subcommand(1);

  std::string config_flag;
  std::string url;

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  serve_cmd->add_option("--config", config_flag, "service configuration (JSON)");

  auto* sim_cmd = app.add_subcommand("sim", "simulation harness");
  sim_cmd->require_subcommand(1);
  std::string scenario_file;
  std::string report_path;
  auto* sim_run_cmd = sim_cmd->add_subcommand("run", "run a scenario under a virtual clock");
  sim_run_cmd->add_option("file", scenario_file, "scenario file")->required();
  sim_run_cmd->add_option("--report", report_path, "write the JSON report here instead of stdout");

  std::string window = "30d";
  std::string domain;
  std::string frequency;
  std::string horizon;
  auto* lb_cmd = app.add_subcommand("leaderboard", "show a leaderboard of a running instance");
  lb_cmd->add_option("--window", window, "7d, 30d, 90d or 365d");
  lb_cmd->add_option("--domain", domain);
  lb_cmd->add_option("--frequency", frequency);
  lb_cmd->add_option("--horizon", horizon);

  auto* models_cmd = app.add_subcommand("models", "model registry");
  models_cmd->require_subcommand(1);
  auto* models_list = models_cmd->add_subcommand("list", "list registered models");

  std::string state;
  auto* ch_cmd = app.add_subcommand("challenges", "challenge listing");
  ch_cmd->require_subcommand(1);
  auto* ch_list = ch_cmd->add_subcommand("list", "list challenges");
  ch_list->add_option("--state", state, "announced, registration, active or closed");

  for (auto* cmd : {lb_cmd, models_list, ch_list}) {
    cmd->add_option("--url", url, "service base URL");
    cmd->add_option("--config", config_flag, "read host and port from this configuration");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(config_flag);
    if (*sim_run_cmd) return sim_run(scenario_file, report_path);
    if (*lb_cmd) {
      httplib::Params params{{"window", window}};
      if (!domain.empty()) params.emplace("domain", domain);
      if (!frequency.empty()) params.emplace("frequency", frequency);
      if (!horizon.empty()) params.emplace("horizon", horizon);
      print_leaderboard(http_get(base_url(url, config_flag), "/v1/leaderboard", params));
      return 0;
    }
    if (*models_list) {
      const auto body = http_get(base_url(url, config_flag), "/v1/models", {});
      for (const auto& m : body) {
        std::printf("%-8s %-32s %-24s %s\n", m.at("model_id").get<std::string>().c_str(),
                    m.at("declared_name_version").get<std::string>().c_str(),
                    m.at("architecture_class").get<std::string>().c_str(), m.at("mode").get<std::string>().c_str());
      }
      return 0;
    }
    if (*ch_list) {
      httplib::Params params;
      if (!state.empty()) params.emplace("state", state);
      const auto body = http_get(base_url(url, config_flag), "/v1/challenges", params);
      for (const auto& c : body) {
        std::printf("%-40s %-12s t_p=%s aliases=%zu\n", c.at("challenge_id").get<std::string>().c_str(),
                    c.at("stage").get<std::string>().c_str(), c.at("t_p").get<std::string>().c_str(),
                    c.at("aliases").size());
      }
      return 0;
    }
  } catch (const arena::Error& e) {
    std::cerr << "arena: " << e.what() << "\n";
    return e.code() == arena::Errc::AssertionFailed ? 1 : 2;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "arena: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
