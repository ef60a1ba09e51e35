// Command-line entry point: optimize, resume, eval, report, serve, templates.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include "promptevo/app/run_file.hpp"
#include "promptevo/engine/engine.hpp"
#include "promptevo/engine/report.hpp"
#include "promptevo/eval/dataset.hpp"
#include "promptevo/eval/evaluator.hpp"
#include "promptevo/operators/population.hpp"
#include "promptevo/service/review_service.hpp"

using namespace promptevo;

namespace {

struct Overrides {
  std::optional<int> population_size;
  std::optional<int> generations;
  std::optional<std::string> algorithm;
  std::optional<std::string> template_version;
  std::optional<bool> coi;
  std::optional<bool> judge;
  std::optional<int> judge_retries;
  std::optional<std::string> strategy;
  std::optional<std::string> mode;
  std::optional<std::string> ordering;
  std::optional<double> subsample_factor;
  std::optional<double> eta_m;
  std::optional<double> eta_p;
  std::optional<int> window;
  std::optional<int> patience;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> survivor;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--population-size", o.population_size, "Population size I");
  cmd->add_option("--generations", o.generations, "Generations T");
  cmd->add_option("--algorithm", o.algorithm, "GA or DE");
  cmd->add_option("--template", o.template_version, "Operator template version");
  cmd->add_option("--coi", o.coi, "Chain-of-instructions operators (true/false)");
  cmd->add_option("--judge", o.judge, "Judge every operator step (true/false)");
  cmd->add_option("--judge-retries", o.judge_retries, "Attempts per step under the judge");
  cmd->add_option("--strategy", o.strategy,
                  "full, subsample, early-stopping, or an ordering (natural, shortest-first, "
                  "hardest-first) which implies early-stopping");
  cmd->add_option("--mode", o.mode, "Evaluation mode");
  cmd->add_option("--ordering", o.ordering, "Sample ordering");
  cmd->add_option("--subsample-factor", o.subsample_factor, "Fraction scored in subsample mode");
  cmd->add_option("--eta-m", o.eta_m, "Moment-based stopping threshold");
  cmd->add_option("--eta-p", o.eta_p, "Parent-based stopping threshold");
  cmd->add_option("--window", o.window, "Stopping window w");
  cmd->add_option("--patience", o.patience, "Samples scored before stopping is considered");
  cmd->add_option("--temperature", o.temperature, "Evolution sampling temperature");
  cmd->add_option("--max-tokens", o.max_tokens, "Completion token limit");
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--survivor", o.survivor, "elitist or generational");
}

void apply_overrides(const Overrides& o, RunConfigSpec& s) {
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(s.population_size, o.population_size);
  set(s.generations, o.generations);
  set(s.algorithm, o.algorithm);
  set(s.template_version, o.template_version);
  set(s.coi_enabled, o.coi);
  set(s.judge_enabled, o.judge);
  set(s.judge_max_retries, o.judge_retries);
  if (o.strategy) {
    const auto& v = *o.strategy;
    if (v == "full" || v == "subsample" || v == "early-stopping") {
      s.evaluation_mode = v;
    } else {
      s.evaluation_mode = "early-stopping";
      s.ordering = v;
    }
  }
  set(s.evaluation_mode, o.mode);
  set(s.ordering, o.ordering);
  set(s.subsample_factor, o.subsample_factor);
  set(s.eta_m, o.eta_m);
  set(s.eta_p, o.eta_p);
  set(s.window, o.window);
  set(s.patience, o.patience);
  set(s.evolution_temperature, o.temperature);
  set(s.max_tokens, o.max_tokens);
  set(s.seed, o.seed);
  set(s.survivor, o.survivor);
}

app::RunFile load_inputs(const std::string& config_path, const std::string& task_path,
                         const std::string& data_path) {
  auto file = app::load_run_file(config_path);
  if (!task_path.empty()) app::override_task(file, task_path);
  if (!data_path.empty()) app::override_dataset(file, data_path);
  app::resolve_synthetic(file);
  if (!file.task) throw app::ConfigError("no task given (config \"task\" or --task)");
  if (file.dataset.empty()) throw app::ConfigError("no dataset given (config \"dataset\" or --data)");
  return file;
}

RunConfig validated(const RunConfigSpec& spec, const TaskSpec& task) {
  auto v = validate_config(spec, task);
  if (!v.ok()) {
    std::string message = "invalid configuration:";
    for (const auto& violation : v.violations) message += "\n  " + violation.field + ": " + violation.message;
    throw app::ConfigError(message);
  }
  return *v.config;
}

int finish(const engine::Engine& engine, engine::RunOutcome outcome, const std::filesystem::path& dir) {
  const auto& state = engine.state();
  engine::write_report(state, dir);
  std::cout << engine::report_text(engine::build_report(state));
  std::cout << "report: " << (dir / "report.json").string() << "\n";
  switch (outcome) {
    case engine::RunOutcome::kCompleted:
    case engine::RunOutcome::kStopped:
      return app::kExitOk;
    case engine::RunOutcome::kPaused:
      std::cerr << "paused at generation " << state.generation << "\n";
      return app::kExitOk;
    case engine::RunOutcome::kHalted:
      std::cerr << "halted: " << state.halt_reason << "\ncheckpoint: " << (dir / "checkpoint.json").string()
                << "\n";
      return state.ledger.size() == 0 ? app::kExitGatewayUnreachable : app::kExitHalted;
  }
  return app::kExitFailure;
}

int run_engine(engine::RunState state, app::RunFile& file, std::optional<int> until) {
  app::GatewayStack gateways(file.gateway, file.record_cassette);
  engine::EngineOptions options;
  options.checkpoint_path = file.output_dir / "checkpoint.json";
  engine::Engine engine(std::move(state), gateways.gateway(), eval::MetricRegistry::with_builtins(
                                                                  file.task ? file.task->verbalizers
                                                                            : std::vector<std::string>{}),
                        options);
  auto outcome = engine.run(until);
  return finish(engine, outcome, file.output_dir);
}

service::ReviewService* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Evolutionary prompt optimization"};
  cli.require_subcommand(1);

  std::string config_path;
  std::string task_path;
  std::string data_path;
  std::string output_dir;
  std::string checkpoint_path;
  std::optional<int> until;
  Overrides overrides;

  auto* optimize = cli.add_subcommand("optimize", "Run an optimization");
  optimize->add_option("--config", config_path, "Run configuration (JSON)")->required();
  optimize->add_option("--task", task_path, "Task description (JSON)");
  optimize->add_option("--data", data_path, "Validation samples (JSONL)");
  optimize->add_option("--output-dir", output_dir, "Where checkpoint and report go");
  optimize->add_option("--resume", checkpoint_path, "Continue from this checkpoint");
  optimize->add_option("--until", until, "Stop after this generation");
  add_overrides(optimize, overrides);

  auto* resume = cli.add_subcommand("resume", "Continue a run from its checkpoint");
  resume->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  resume->add_option("--config", config_path, "Run configuration naming the gateway")->required();
  resume->add_option("--output-dir", output_dir, "Where checkpoint and report go");
  resume->add_option("--until", until, "Stop after this generation");

  std::string prompt_text;
  auto* evaluate = cli.add_subcommand("eval", "Score one prompt on a held-out set");
  evaluate->add_option("--config", config_path, "Run configuration naming the gateway")->required();
  evaluate->add_option("--task", task_path, "Task description (JSON)");
  evaluate->add_option("--data", data_path, "Held-out samples (JSONL)");
  evaluate->add_option("--prompt", prompt_text, "Prompt text")->required();

  auto* report = cli.add_subcommand("report", "Write and print the report of a checkpoint");
  report->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  report->add_option("--output-dir", output_dir, "Directory for report.json and report.txt");
  std::string test_path;
  auto* test_opt = report->add_option("--test-data", test_path, "Held-out samples (JSONL) to score the final prompts on");
  report->add_option("--config", config_path, "Run configuration naming the gateway")->needs(test_opt);
  test_opt->needs(report->get_option("--config"));

  std::string state_dir = ".";
  std::string bind = "127.0.0.1:8080";
  auto* serve = cli.add_subcommand("serve", "Run with the review service attached");
  serve->add_option("--config", config_path, "Run configuration")->required();
  serve->add_option("--state-dir", state_dir, "Directory holding the checkpoint and report");
  serve->add_option("--bind", bind, "host:port to listen on");
  add_overrides(serve, overrides);

  std::string templates_dir;
  auto* templates = cli.add_subcommand("templates", "Operator template files");
  auto* export_cmd = templates->add_subcommand("export", "Write the built-in templates as JSON");
  export_cmd->add_option("--dir", templates_dir, "Target directory")->required();
  templates->require_subcommand(1);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitConfigInvalid;
  }

  try {
    if (*optimize) {
      auto file = load_inputs(config_path, task_path, data_path);
      if (!output_dir.empty()) file.output_dir = output_dir;
      if (!checkpoint_path.empty()) return run_engine(engine::read_checkpoint(checkpoint_path), file, until);
      apply_overrides(overrides, file.run);
      auto config = validated(file.run, *file.task);
      auto state = engine::make_run_state(file.task->name, config, *file.task, file.dataset,
                                          app::load_templates(file));
      return run_engine(std::move(state), file, until);
    }

    if (*resume) {
      auto file = app::load_run_file(config_path);
      if (!output_dir.empty()) file.output_dir = output_dir;
      auto state = engine::read_checkpoint(checkpoint_path);
      file.task = state.task;
      return run_engine(std::move(state), file, until);
    }

    if (*evaluate) {
      auto file = load_inputs(config_path, task_path, data_path);
      app::GatewayStack gateways(file.gateway, file.record_cassette);
      TokenLedger ledger;
      auto metrics = eval::MetricRegistry::with_builtins(file.task->verbalizers);
      std::mt19937_64 rng(file.run.seed.value_or(0));
      auto demos = operators::select_demonstrations(*file.task, file.dataset, rng);
      eval::Evaluator evaluator(*file.task, metrics, demos, gateways.gateway(), ledger);
      StrategyConfig full;
      full.mode = EvaluationMode::kFull;
      eval::ScoreCache cache;
      auto result = evaluator.evaluate(PromptGenome::base("heldout", prompt_text), file.dataset, full,
                                       {}, nullptr, nullptr, 0, cache);
      std::printf("score %.4f over %zu samples (%lld tokens)\n", result.fitness, result.samples_used,
                  static_cast<long long>(ledger.total().tokens()));
      return app::kExitOk;
    }

    if (*report) {
      auto state = engine::read_checkpoint(checkpoint_path);
      std::filesystem::path dir =
          output_dir.empty() ? std::filesystem::path(checkpoint_path).parent_path() : std::filesystem::path(output_dir);
      std::optional<json> held_out;
      if (!test_path.empty()) {
        auto file = app::load_run_file(config_path);
        app::GatewayStack gateways(file.gateway, file.record_cassette);
        TokenLedger ledger;
        held_out = engine::score_held_out(state, eval::load_samples(test_path, state.task), gateways.gateway(),
                                          eval::MetricRegistry::with_builtins(state.task.verbalizers), ledger);
        (*held_out)["ledger"] = ledger.total();
      }
      engine::write_report(state, dir, held_out);
      std::cout << engine::report_text(engine::build_report(state, held_out));
      return app::kExitOk;
    }

    if (*serve) {
      auto file = load_inputs(config_path, "", "");
      file.output_dir = state_dir;
      apply_overrides(overrides, file.run);
      auto config = validated(file.run, *file.task);
      const auto checkpoint = file.output_dir / "checkpoint.json";
      auto state = std::filesystem::exists(checkpoint)
                       ? engine::read_checkpoint(checkpoint)
                       : engine::make_run_state(file.task->name, config, *file.task, file.dataset,
                                                app::load_templates(file));

      auto host = std::make_shared<service::RunHost>(state.run_id);
      service::ReviewService service(state.templates);
      service.add_run(host);
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw app::ConfigError("--bind must be host:port");
      const int port = service.bind(bind.substr(0, colon), std::stoi(bind.substr(colon + 1)));
      std::cout << "serving on http://" << bind.substr(0, colon) << ":" << port << "/api/v1\n" << std::flush;

      app::GatewayStack gateways(file.gateway, file.record_cassette);
      engine::EngineOptions options;
      options.checkpoint_path = checkpoint;
      options.commands = &host->commands();
      options.reviews = &host->reviews();
      options.wait_when_paused = true;
      options.on_snapshot = [host](const engine::RunState& s) { host->publish(s); };
      engine::Engine engine(std::move(state), gateways.gateway(),
                            eval::MetricRegistry::with_builtins(file.task->verbalizers), options);
      host->publish(engine.state());

      std::thread worker([&] {
        auto outcome = engine.run();
        engine::write_report(engine.state(), file.output_dir);
        std::cout << "run " << engine::to_string(outcome) << "\n" << std::flush;
      });
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.serve();
      host->commands().close();
      worker.join();
      return app::kExitOk;
    }

    if (*templates) {
      operators::TemplateRegistry::builtin().export_directory(templates_dir);
      std::cout << "templates written to " << templates_dir << "\n";
      return app::kExitOk;
    }
  } catch (const app::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return app::kExitConfigInvalid;
  } catch (const engine::CheckpointError& e) {
    std::cerr << e.what() << "\n";
    return app::kExitConfigInvalid;
  } catch (const operators::TemplateError& e) {
    std::cerr << e.what() << "\n";
    return app::kExitConfigInvalid;
  } catch (const llm::GatewayError& e) {
    std::cerr << "gateway: " << e.what() << "\n";
    return app::kExitGatewayUnreachable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kExitFailure;
  }
  return app::kExitOk;
}
