#include "promptevo/service/review_service.hpp"

#include <httplib.h>

#include <chrono>
#include <ctime>

#include "promptevo/engine/report.hpp"

namespace promptevo::service {

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

}  // namespace

json run_summary(const engine::RunState& state, std::size_t pending_reviews) {
  const auto budget = engine::budget_summary(state);
  json s{{"id", state.run_id},
         {"task", state.task.name},
         {"status", engine::to_string(state.status)},
         {"generation", state.generation},
         {"generations", state.config.generations},
         {"population_size", state.config.population_size},
         {"template_version", state.config.template_version},
         {"pending_reviews", pending_reviews},
         {"tokens_used", state.ledger.total().tokens()},
         {"budget",
          {{"evaluation_tokens", budget.evaluation_tokens},
           {"tokens_baseline", budget.tokens_baseline},
           {"tokens_fraction", budget.tokens_fraction},
           {"samples_used", budget.samples_used},
           {"samples_baseline", budget.samples_baseline},
           {"samples_fraction", budget.samples_fraction}}}};
  if (state.best_so_far) {
    s["best_fitness"] = state.best_so_far->score();
    s["best_prompt"] = state.best_so_far->genome.text();
  } else {
    s["best_fitness"] = nullptr;
    s["best_prompt"] = nullptr;
  }
  if (!state.halt_reason.empty()) s["halt_reason"] = state.halt_reason;
  return s;
}

json run_history(const engine::RunState& state) {
  json out = json::array();
  for (const auto& h : state.history)
    out.push_back({{"generation", h.generation},
                   {"best", h.best},
                   {"mean", h.mean},
                   {"best_so_far", h.best_so_far}});
  return out;
}

void RunHost::publish(const engine::RunState& state) {
  auto summary = run_summary(state, reviews_.pending_count());
  auto history = run_history(state);
  std::lock_guard lock(mutex_);
  summary_ = std::move(summary);
  history_ = std::move(history);
}

json RunHost::summary() const {
  std::lock_guard lock(mutex_);
  if (summary_.is_null()) return json{{"id", id_}, {"status", "created"}};
  auto s = summary_;
  s["pending_reviews"] = reviews_.pending_count();
  return s;
}

json RunHost::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

bool RunHost::has_snapshot() const {
  std::lock_guard lock(mutex_);
  return !summary_.is_null();
}

struct ReviewService::Impl {
  httplib::Server server;
  mutable std::mutex mutex;
  std::map<std::string, std::shared_ptr<RunHost>> runs;
  operators::TemplateRegistry templates;
  std::thread thread;

  std::shared_ptr<RunHost> find(const std::string& id) const {
    std::lock_guard lock(mutex);
    auto it = runs.find(id);
    return it == runs.end() ? nullptr : it->second;
  }

  std::shared_ptr<RunHost> owner_of_review(const std::string& review_id) const {
    std::lock_guard lock(mutex);
    for (const auto& [id, run] : runs)
      if (run->reviews().get(review_id)) return run;
    return nullptr;
  }

  json template_json(const std::string& version) const {
    json variants = json::object();
    for (const auto& [key, t] : templates.all()) {
      if (key.first != version) continue;
      json steps = json::array();
      for (std::size_t i = 0; i < t.steps.size(); ++i)
        steps.push_back({{"step", i + 1}, {"instruction", t.steps[i].instruction}});
      variants[t.coi ? "coi" : "single"] = {{"algorithm", to_string(t.algorithm)}, {"steps", steps}};
    }
    return json{{"version", version}, {"variants", variants}};
  }

  void routes();
};

void ReviewService::Impl::routes() {
  server.Get("/api/v1/runs", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    std::lock_guard lock(mutex);
    for (const auto& [id, run] : runs) out.push_back(run->summary());
    send_json(res, 200, out);
  });

  server.Get(R"(/api/v1/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto run = find(req.matches[1]);
    if (!run) return send_error(res, 404, "unknown run " + std::string(req.matches[1]));
    send_json(res, 200, run->summary());
  });

  server.Get(R"(/api/v1/runs/([^/]+)/history)",
             [this](const httplib::Request& req, httplib::Response& res) {
               auto run = find(req.matches[1]);
               if (!run) return send_error(res, 404, "unknown run " + std::string(req.matches[1]));
               send_json(res, 200, run->history());
             });

  server.Get(R"(/api/v1/runs/([^/]+)/reviews)",
             [this](const httplib::Request& req, httplib::Response& res) {
               auto run = find(req.matches[1]);
               if (!run) return send_error(res, 404, "unknown run " + std::string(req.matches[1]));
               std::optional<engine::ReviewStatus> status;
               if (req.has_param("status")) {
                 try {
                   status = engine::parse_review_status(req.get_param_value("status"));
                 } catch (const std::exception& e) {
                   return send_error(res, 400, e.what());
                 }
               }
               send_json(res, 200, json(run->reviews().list(status)));
             });

  server.Post(R"(/api/v1/runs/([^/]+)/(pause|resume))",
              [this](const httplib::Request& req, httplib::Response& res) {
                auto run = find(req.matches[1]);
                if (!run) return send_error(res, 404, "unknown run " + std::string(req.matches[1]));
                auto command = req.matches[2] == "pause" ? engine::FeedbackCommand::pause("api")
                                                         : engine::FeedbackCommand::resume("api");
                command.submitted_at = now_utc();
                run->commands().push(command);
                send_json(res, 202, json{{"queued", command}});
              });

  server.Post(R"(/api/v1/reviews/([^/]+))", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
    const std::string id = req.matches[1];
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("decision"))
      return send_error(res, 400, "body must be an object with a decision");
    const auto decision = body.value("decision", std::string());
    if (decision != "approve" && decision != "edit")
      return send_error(res, 400, "decision must be approve or edit");
    if (decision == "edit" && !body.contains("text"))
      return send_error(res, 400, "an edit needs the replacement text");

    auto run = owner_of_review(id);
    if (!run) return send_error(res, 404, "unknown review " + id);
    switch (run->reviews().claim(id)) {
      case engine::ReviewBoard::Claim::kNotFound:
        return send_error(res, 404, "unknown review " + id);
      case engine::ReviewBoard::Claim::kConflict:
        return send_error(res, 409, "review " + id + " is already decided");
      case engine::ReviewBoard::Claim::kClaimed:
        break;
    }
    auto command = decision == "approve"
                       ? engine::FeedbackCommand::approve_review(id)
                       : engine::FeedbackCommand::reject_with_edit(id, body.at("text").get<std::string>());
    command.actor = body.value("actor", std::string("api"));
    command.submitted_at = now_utc();
    run->commands().push(command);
    send_json(res, 200, json(*run->reviews().get(id)));
  });

  server.Get("/api/v1/templates", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mutex);
    json out = json::array();
    for (const auto& version : templates.versions()) out.push_back(template_json(version));
    send_json(res, 200, out);
  });

  server.Get(R"(/api/v1/templates/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex);
    const std::string version = req.matches[1];
    if (!templates.contains(version, true) && !templates.contains(version, false))
      return send_error(res, 404, "unknown template " + version);
    send_json(res, 200, template_json(version));
  });

  server.Put(R"(/api/v1/templates/([^/]+)/steps/(\d+))", [this](const httplib::Request& req,
                                                               httplib::Response& res) {
    const std::string version = req.matches[1];
    const int step = std::stoi(req.matches[2]);
    std::string instruction = req.body;
    bool coi = true;
    json body = json::parse(req.body, nullptr, false);
    if (!body.is_discarded() && body.is_object()) {
      if (!body.contains("instruction") || !body["instruction"].is_string())
        return send_error(res, 400, "body needs an instruction string");
      instruction = body["instruction"].get<std::string>();
      coi = body.value("coi", true);
    }

    std::lock_guard lock(mutex);
    if (!templates.contains(version, coi)) return send_error(res, 404, "unknown template " + version);
    auto candidate = templates.get(version, coi);
    if (step < 1 || static_cast<std::size_t>(step) > candidate.steps.size())
      return send_error(res, 422, "template " + version + " has no step " + std::to_string(step));
    candidate.steps[static_cast<std::size_t>(step - 1)].instruction = instruction;
    try {
      operators::validate_template(candidate);
    } catch (const operators::TemplateError& e) {
      return send_error(res, 422, e.what());
    }
    templates.get_mutable(version, coi) = candidate;

    auto command = engine::FeedbackCommand::replace_template(version, step, instruction, coi);
    command.actor = "api";
    command.submitted_at = now_utc();
    json queued = json::array();
    for (const auto& [id, run] : runs) {
      run->commands().push(command);
      queued.push_back(id);
    }
    send_json(res, 200, json{{"version", version},
                             {"step", step},
                             {"coi", coi},
                             {"instruction", instruction},
                             {"queued_runs", queued}});
  });
}

ReviewService::ReviewService(operators::TemplateRegistry templates) : impl_(std::make_unique<Impl>()) {
  impl_->templates = std::move(templates);
  impl_->routes();
}

ReviewService::~ReviewService() { stop(); }

void ReviewService::add_run(std::shared_ptr<RunHost> run) {
  std::lock_guard lock(impl_->mutex);
  auto id = run->id();
  impl_->runs.insert_or_assign(std::move(id), std::move(run));
}

std::shared_ptr<RunHost> ReviewService::run(const std::string& id) const { return impl_->find(id); }

int ReviewService::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void ReviewService::serve() { impl_->server.listen_after_bind(); }

int ReviewService::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ReviewService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

operators::TemplateRegistry ReviewService::templates() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->templates;
}

}  // namespace promptevo::service
