#include "whatif/service.hpp"

#include <httplib.h>

#include "whatif/diff.hpp"
#include "whatif/edits.hpp"
#include "whatif/fifo_semaphore.hpp"
#include "whatif/json_io.hpp"
#include "whatif/plan.hpp"

namespace whatif {

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void fail(httplib::Response& res, int status, const std::string& message) {
  send(res, status, Json{{"error", {{"status", status}, {"message", message}}}});
}

Json entry_json(const StoreEntry& e) {
  auto j = to_json(e.summary);
  j["parent_deleted"] = e.parent_deleted;
  return j;
}

Json dataset_summary(const Dataset& ds) {
  auto j = to_json(ds);
  j["counts"] = {{"products", ds.products.size()},
                 {"bom_edges", ds.bom_edges.size()},
                 {"factories", ds.factories.size()},
                 {"capacity_sets", ds.capacity_sets.size()},
                 {"usage_rates", ds.usage_rates.size()},
                 {"fixed_component_constraints", ds.fixed_component_constraints.size()}};
  j["horizon"] = ds.default_config.horizon;
  return j;
}

}  // namespace

int status_for(PlanningError::Kind kind) {
  switch (kind) {
    case PlanningError::Kind::kInvalidConfig: return 400;
    case PlanningError::Kind::kInfeasible: return 422;
    case PlanningError::Kind::kTimeout: return 504;
    case PlanningError::Kind::kUnbounded: return 500;
  }
  return 500;
}

struct Service::Impl {
  Impl(std::optional<Dataset> ds, PlanStore& st, ServiceOptions opts)
      : dataset(std::move(ds)), store(st), options(std::move(opts)), runs(options.max_concurrent_runs) {
    routes();
  }

  std::optional<Dataset> dataset;
  PlanStore& store;
  ServiceOptions options;
  FifoSemaphore runs;
  httplib::Server server;
  std::atomic<bool> bound{false};

  bool need_dataset(httplib::Response& res) {
    if (dataset) return true;
    fail(res, 503, "no dataset is loaded");
    return false;
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      fail(res, 500, message);
    });
    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());

    server.Get("/api/dataset", [this](const httplib::Request&, httplib::Response& res) {
      if (!need_dataset(res)) return;
      send(res, 200, dataset_summary(*dataset));
    });

    server.Post("/api/plans", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });

    server.Get("/api/plans", [this](const httplib::Request&, httplib::Response& res) {
      Json plans = Json::array();
      for (const auto& e : store.list()) plans.push_back(entry_json(e));
      send(res, 200, Json{{"plans", plans}});
    });

    server.Get(R"(/api/plans/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, 200, to_json(store.get(req.matches[1])));
      } catch (const StoreError& e) {
        fail(res, e.kind() == StoreError::Kind::kNotFound ? 404 : 500, e.what());
      }
    });

    server.Delete(R"(/api/plans/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        store.remove(req.matches[1]);
        res.status = 204;
      } catch (const StoreError& e) {
        fail(res, e.kind() == StoreError::Kind::kNotFound ? 404 : 500, e.what());
      }
    });

    server.Get(R"(/api/diff/([^/]+)/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      diff(req, res);
    });
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    if (!need_dataset(res)) return;
    const auto deadline = std::chrono::steady_clock::now() + options.run_timeout;
    Json body;
    try {
      body = req.body.empty() ? Json::object() : Json::parse(req.body);
    } catch (const Json::exception& e) {
      return fail(res, 400, std::string("request body is not JSON: ") + e.what());
    }
    if (!body.is_object()) return fail(res, 400, "request body must be a JSON object");

    PlanOptions plan_options;
    PlanConfig base = dataset->default_config;
    std::vector<ConfigEdit> edits;
    try {
      if (body.contains("base_plan_id") && !body["base_plan_id"].is_null()) {
        if (!body["base_plan_id"].is_string()) return fail(res, 400, "base_plan_id must be a string");
        const auto id = body["base_plan_id"].get<std::string>();
        try {
          base = store.get(id).config;
        } catch (const StoreError& e) {
          return fail(res, e.kind() == StoreError::Kind::kNotFound ? 404 : 500, e.what());
        }
        plan_options.parent_id = id;
      }
      if (body.contains("label")) {
        if (!body["label"].is_string()) return fail(res, 400, "label must be a string");
        plan_options.label = body["label"].get<std::string>();
      }
      if (body.contains("config_edits")) edits = edits_from_json(body["config_edits"]);
    } catch (const EditError& e) {
      return fail(res, 400, e.what());
    }

    PlanConfig config;
    try {
      config = apply_edits(*dataset, base, edits);
    } catch (const EditError& e) {
      return fail(res, 400, e.what());
    }

    if (!runs.acquire_until(deadline)) return fail(res, 504, "timed out waiting for a free planner");
    Plan result;
    {
      PermitGuard permit(runs);
      auto params = options.params;
      params.deadline = deadline;
      try {
        result = plan(*dataset, config, params, plan_options);
      } catch (const PlanningError& e) {
        return fail(res, status_for(e.kind()), e.what());
      }
    }
    try {
      const auto id = store.put(result);
      for (const auto& e : store.list()) {
        if (e.summary.id == id) {
          res.set_header("Location", "/api/plans/" + id);
          return send(res, 201, entry_json(e));
        }
      }
      fail(res, 500, "stored plan vanished");
    } catch (const StoreError& e) {
      fail(res, e.kind() == StoreError::Kind::kInvalid ? 409 : 500, e.what());
    }
  }

  void diff(const httplib::Request& req, httplib::Response& res) {
    if (!need_dataset(res)) return;
    DiffLevel level = DiffLevel::kPlan;
    try {
      if (req.has_param("level")) level = diff_level_from_string(req.get_param_value("level"));
    } catch (const std::invalid_argument& e) {
      return fail(res, 400, e.what());
    }
    if (level == DiffLevel::kDetail && !req.has_param("product")) {
      return fail(res, 400, "the detail level needs a product parameter");
    }
    Plan a, b;
    try {
      a = store.get(req.matches[1]);
      b = store.get(req.matches[2]);
    } catch (const StoreError& e) {
      return fail(res, e.kind() == StoreError::Kind::kNotFound ? 404 : 500, e.what());
    }
    try {
      const auto d = diff_plans(a, b);
      if (level != DiffLevel::kDetail) return send(res, 200, diff_to_json(d, level));
      const auto product = req.get_param_value("product");
      if (!DatasetIndex(*dataset).find_product(product)) return fail(res, 404, "unknown product: " + product);
      const auto slice = detail_slice(*dataset, a, b, product);
      send(res, 200, diff_to_json(d, level, &slice));
    } catch (const DiffError& e) {
      fail(res, 400, e.what());
    }
  }
};

Service::Service(std::optional<Dataset> dataset, PlanStore& store, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(dataset), store, std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  impl_->bound = bound > 0;
  return bound > 0 ? bound : -1;
}

bool Service::run() {
  if (!impl_->bound) return false;
  return impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

}  // namespace whatif
