#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "whatif/model.hpp"
#include "whatif/plan_store.hpp"
#include "whatif/planner.hpp"

namespace whatif {

struct ServiceOptions {
  int max_concurrent_runs = 2;
  /// Covers queueing and solving of one plan request.
  std::chrono::milliseconds run_timeout{std::chrono::seconds(120)};
  std::string cors_origin = "*";
  /// Static UI assets served under "/", if set.
  std::optional<std::filesystem::path> static_dir;
  HybridParams params;
};

/// HTTP status for a planning failure.
int status_for(PlanningError::Kind kind);

/// The JSON/HTTP API over one dataset and one plan store. Routes are listed
/// in docs/api.md.
class Service {
 public:
  /// Without a dataset every dataset-dependent route answers 503.
  Service(std::optional<Dataset> dataset, PlanStore& store, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and returns the port (port 0 picks a free one). Returns -1 on
  /// failure.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a successful bind.
  bool run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace whatif
