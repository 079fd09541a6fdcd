#include "arena/platform.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <unistd.h>

#include "arena/error.hpp"

namespace arena {

Platform::Platform(const Clock& clock, PlatformConfig config) : clock_(clock), config_(std::move(config)) {
  std::optional<std::filesystem::path> store_log;
  if (config_.data_dir) {
    std::filesystem::create_directories(*config_.data_dir);
    store_log = *config_.data_dir / "store.log";
  }
  store_ = std::make_unique<Scd2Store>(clock_, store_log);
  ingestor_ = std::make_unique<Ingestor>(*store_);
  ingestor_->set_lookback_factor(config_.lookback_factor);
  scheduler_ = std::make_unique<IngestionScheduler>(*ingestor_, substream_seed(config_.seed, "ingestion-jitter"));

  for (const auto& pc : config_.providers) {
    std::unique_ptr<Provider> p;
    if (pc.descriptor.kind == ProviderKind::synthetic) {
      p = std::make_unique<SyntheticProvider>(pc.descriptor, pc.synthetic);
    } else {
      if (!pc.fixture) throw Error(Errc::InvalidArgument, pc.descriptor.name + ": http_stub provider needs a fixture");
      p = std::make_unique<FixtureProvider>(pc.descriptor, *pc.fixture);
    }
    for (const auto& s : pc.descriptor.series_catalog) store_->register_series(s);
    scheduler_->add(*p);
    providers_.emplace(pc.descriptor.name, std::move(p));
  }
  for (const auto& [key, threshold] : config_.staleness_thresholds) ingestor_->set_staleness_threshold(key, threshold);

  orchestrator_ = std::make_unique<Orchestrator>(*store_, *ingestor_, config_.schedule, config_.gateway.secret);
  gateway_ = std::make_unique<Gateway>(clock_, *store_, *orchestrator_, config_.gateway);
  evaluator_ = std::make_unique<Evaluator>(*store_, config_.coverage_floor);

  if (config_.data_dir) {
    const auto path = *config_.data_dir / "journal.jsonl";
    if (std::filesystem::exists(path)) replay_journal(path);
    open_journal();
  }

  const auto models = gateway_->list_models();
  for (const auto& bc : config_.baselines) {
    BaselineAgent agent(bc, *gateway_);
    std::optional<ApiKey> existing;
    for (const auto& m : models) {
      if (m.declared_name_version == agent.card().declared_name_version) existing = gateway_->key_for_model(m.model_id);
    }
    agent.attach(existing);
    agents_.push_back(std::move(agent));
  }
}

Platform::~Platform() {
  if (journal_file_) std::fclose(journal_file_);
}

void Platform::open_journal() {
  journal_file_ = std::fopen((*config_.data_dir / "journal.jsonl").c_str(), "a");
  if (!journal_file_) throw Error(Errc::InvalidArgument, "cannot open platform journal");
  auto sink = [this](const Json& record) { journal(record); };
  gateway_->set_journal(sink);
  orchestrator_->set_on_create([this](const Challenge& c) {
    journal(Json{{"kind", "challenge"}, {"spec", c.spec}, {"aliases", c.aliases}});
  });
  orchestrator_->set_on_transition([this](const Challenge& c) {
    Json rec{{"kind", "stage"}, {"challenge_id", c.spec.challenge_id}, {"stage", to_string(c.state.stage)}};
    if (c.state.closed_at) rec["closed_at"] = ts_json(*c.state.closed_at);
    journal(rec);
  });
}

void Platform::journal(const Json& record) {
  std::lock_guard lock(journal_mutex_);
  if (!journal_file_) return;
  const auto line = record.dump();
  std::fputs(line.c_str(), journal_file_);
  std::fputc('\n', journal_file_);
  std::fflush(journal_file_);
  ::fsync(::fileno(journal_file_));
}

void Platform::replay_journal(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::optional<std::uintmax_t> torn_at;
  for (auto offset = in.tellg(); std::getline(in, line); offset = in.tellg()) {
    if (line.empty()) continue;
    auto rec = Json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      if (in.peek() == EOF) {
        torn_at = static_cast<std::uintmax_t>(offset);
        break;
      }
      throw Error(Errc::ParseError, path.string() + ": unreadable journal record");
    }
    const auto kind = rec.at("kind").get<std::string>();
    if (kind == "challenge") {
      Challenge c;
      c.spec = rec.at("spec").get<ChallengeSpec>();
      c.aliases = rec.at("aliases").get<std::vector<SeriesAlias>>();
      orchestrator_->restore(std::move(c));
    } else if (kind == "stage") {
      std::optional<Timestamp> closed_at;
      if (rec.contains("closed_at")) closed_at = ts_from(rec.at("closed_at"));
      orchestrator_->restore_stage(rec.at("challenge_id").get<std::string>(),
                                   parse_stage(rec.at("stage").get<std::string>()), closed_at);
    } else if (kind == "final") {
      evaluator_->restore_final(rec.at("challenge_id").get<std::string>(),
                                rec.at("series").get<std::vector<SeriesScore>>(),
                                rec.at("challenge").get<std::vector<ChallengeScore>>(),
                                rec.at("degenerate").get<std::vector<std::string>>());
    } else {
      gateway_->restore(rec);
      if (kind == "submission") {
        const auto& s = rec.at("submission");
        orchestrator_->record_participation(s.at("challenge_id").get<std::string>(), s.at("model_id").get<std::string>(),
                                            s.at("series_alias").get<std::string>());
      }
    }
  }
  in.close();
  if (torn_at) {
    spdlog::warn("journal: dropping torn final record");
    std::filesystem::resize_file(path, *torn_at);
  }
}

Provider& Platform::provider(const std::string& name) {
  auto it = providers_.find(name);
  if (it == providers_.end()) throw Error(Errc::InvalidArgument, "unknown provider " + name);
  return *it->second;
}

EvalInput Platform::eval_input(const Challenge& c) const {
  EvalInput in;
  in.challenge_id = c.spec.challenge_id;
  in.t_p = c.spec.t_p;
  in.frequency = c.spec.bucket.frequency;
  in.horizon_h = c.spec.horizon_h;
  in.context_length = c.spec.context_length;
  in.closed = c.state.stage == Stage::closed;
  std::map<std::string, std::string> series_of;
  for (const auto& a : c.aliases) {
    in.series.push_back(a.true_series);
    series_of.emplace(a.alias, a.true_series);
  }
  for (const auto& sub : gateway_->accepted_submissions(c.spec.challenge_id)) {
    auto it = series_of.find(sub.series_alias);
    if (it != series_of.end()) in.submissions.push_back(EvalSubmission{sub.model_id, it->second, sub.values});
  }
  return in;
}

int Platform::evaluate(Timestamp now) {
  int finalized = 0;
  for (const auto& c : orchestrator_->list()) {
    if (c.state.stage == Stage::active) {
      evaluator_->update_partial(eval_input(c), now);
    } else if (c.state.stage == Stage::closed && !evaluator_->is_finalized(c.spec.challenge_id)) {
      auto scores = evaluator_->finalize(eval_input(c), now);
      ++finalized;
      journal(Json{{"kind", "final"},
                   {"challenge_id", c.spec.challenge_id},
                   {"series", evaluator_->series_scores(c.spec.challenge_id)},
                   {"challenge", scores},
                   {"degenerate", evaluator_->degenerate_series(c.spec.challenge_id)}});
    }
  }
  return finalized;
}

Platform::TickReport Platform::tick() {
  std::lock_guard lock(tick_mutex_);
  const Timestamp now = clock_.now();
  TickReport report;
  report.polls = scheduler_->tick(now);
  report.created = static_cast<int>(orchestrator_->plan(now).size());
  report.transitions = orchestrator_->tick(now);
  for (auto& agent : agents_) report.agent_submissions += agent.tick(now);
  report.finalized = evaluate(now);
  if (report.finalized > 0) {
    std::lock_guard cache_lock(cache_mutex_);
    cache_.clear();
  }
  return report;
}

std::vector<ClosedChallenge> Platform::closed_challenges() const {
  std::vector<ClosedChallenge> out;
  for (const auto& c : orchestrator_->list()) {
    if (c.state.stage == Stage::closed && c.state.closed_at) {
      out.push_back(ClosedChallenge{c.spec.challenge_id, c.spec.bucket, c.spec.registration_open_at, *c.state.closed_at});
    }
  }
  return out;
}

std::vector<ModelEntry> Platform::model_entries() const {
  std::vector<ModelEntry> out;
  for (const auto& m : gateway_->list_models()) out.push_back(ModelEntry{m.model_id, m.registered_at});
  return out;
}

std::vector<LeaderboardEntry> Platform::leaderboard(const Scope& scope, const Window& window) {
  const Timestamp now = clock_.now();
  const auto models = model_entries();
  const std::uint64_t generation = evaluator_->generation() * 1000003ULL + models.size();
  const std::string key = Json(scope).dump() + "|" + window.label();
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.generation == generation && now >= it->second.computed_at &&
        now - it->second.computed_at < config_.leaderboard_cache) {
      return it->second.entries;
    }
  }
  auto entries =
      compute_leaderboard(scope, window, now, closed_challenges(), evaluator_->all_challenge_scores(), models);
  std::lock_guard lock(cache_mutex_);
  cache_.insert_or_assign(key, CacheEntry{now, generation, entries});
  return entries;
}

}  // namespace arena
