#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "promptevo/engine/commands.hpp"
#include "promptevo/engine/review.hpp"
#include "promptevo/engine/run_state.hpp"
#include "promptevo/operators/templates.hpp"

namespace promptevo::service {

/// The service's view of one run: the channels into its engine plus the
/// latest published snapshot. Readers never touch the engine's RunState.
class RunHost {
 public:
  explicit RunHost(std::string id) : id_(std::move(id)) {}

  const std::string& id() const { return id_; }
  engine::CommandQueue& commands() { return commands_; }
  engine::ReviewBoard& reviews() { return reviews_; }

  /// Engine snapshot callback.
  void publish(const engine::RunState& state);

  json summary() const;
  json history() const;
  bool has_snapshot() const;

 private:
  std::string id_;
  engine::CommandQueue commands_;
  engine::ReviewBoard reviews_;
  mutable std::mutex mutex_;
  json summary_;
  json history_ = json::array();
};

json run_summary(const engine::RunState& state, std::size_t pending_reviews);
json run_history(const engine::RunState& state);

/// HTTP API under /api/v1 for monitoring runs and steering them.
class ReviewService {
 public:
  explicit ReviewService(operators::TemplateRegistry templates);
  ~ReviewService();
  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  void add_run(std::shared_ptr<RunHost> run);
  std::shared_ptr<RunHost> run(const std::string& id) const;

  /// Binds to host:port (port 0 picks a free one) and returns the bound port.
  /// Throws std::runtime_error when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop(); blocks the caller.
  void serve();
  /// bind + serve on a background thread.
  int start(const std::string& host, int port);
  void stop();

  operators::TemplateRegistry templates() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace promptevo::service
