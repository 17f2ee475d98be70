#include <doctest.h>

#include <httplib.h>
#include <unistd.h>

#include <filesystem>
#include <thread>

#include "support/fixtures.hpp"
#include "support/schema.hpp"
#include "whatif/json_io.hpp"
#include "whatif/service.hpp"

using namespace whatif;
namespace fs = std::filesystem;

namespace {

testing_support::SchemaSet& schemas() {
  static testing_support::SchemaSet set(WHATIF_SCHEMA_DIR);
  return set;
}

void expect_schema(const Json& doc, const std::string& schema) {
  const auto errors = schemas().validate(doc, schema);
  for (const auto& e : errors) MESSAGE(schema << " " << e);
  CHECK(errors.empty());
}

struct Harness {
  fs::path dir;
  std::unique_ptr<PlanStore> store;
  std::unique_ptr<Service> service;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;

  explicit Harness(std::optional<Dataset> ds, ServiceOptions options = {}) {
    char tmpl[] = "/tmp/whatif-service-XXXXXX";
    dir = ::mkdtemp(tmpl);
    store = std::make_unique<PlanStore>(dir);
    service = std::make_unique<Service>(std::move(ds), *store, options);
    const int port = service->bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { service->run(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(60, 0);
    for (int i = 0; i < 200 && !service->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ~Harness() {
    service->stop();
    thread.join();
    fs::remove_all(dir);
  }

  Json get(const std::string& path, int expected_status) {
    auto res = client->Get(path);
    REQUIRE(res);
    CHECK_MESSAGE(res->status == expected_status, path << " -> " << res->status << " " << res->body);
    return res->body.empty() ? Json() : Json::parse(res->body);
  }

  Json post(const Json& body, int expected_status) {
    if (expected_status != 400) expect_schema(body, "create_plan_request.json");
    auto res = client->Post("/api/plans", body.dump(), "application/json");
    REQUIRE(res);
    CHECK_MESSAGE(res->status == expected_status, res->status << " " << res->body);
    const auto j = Json::parse(res->body);
    if (expected_status == 201) {
      expect_schema(j, "plan_summary.json");
      CHECK(res->get_header_value("Location") == "/api/plans/" + j["id"].get<std::string>());
    } else {
      expect_schema(j, "error.json");
    }
    return j;
  }

  Json plan(const std::string& id) {
    const auto j = get("/api/plans/" + id, 200);
    expect_schema(j, "plan.json");
    return j;
  }

  Json diff(const std::string& a, const std::string& b, const std::string& query = "") {
    const auto j = get("/api/diff/" + a + "/" + b + query, 200);
    expect_schema(j, "diff.json");
    return j;
  }
};

Json capacity_of(const Json& plan, const std::string& set) {
  for (const auto& cs : plan["config"]["capacity_sets"]) {
    if (cs["id"] == set) return cs["daily_capacity"];
  }
  FAIL("no capacity set " << set);
  return {};
}

double delay_total(const Json& plan, const std::string& product) {
  for (const auto& p : plan["kpis"]["products"]) {
    if (p["product"] == product) return p["summary"]["delay_rate"]["value"].get<double>();
  }
  FAIL("no product " << product);
  return 0.0;
}

}  // namespace

TEST_CASE("dataset endpoint returns the dataset with counts") {
  Harness h(testing_support::scenario_dataset());
  const auto j = h.get("/api/dataset", 200);
  expect_schema(j, "dataset_summary.json");
  CHECK(j["counts"]["products"] == 8);
  CHECK(j["counts"]["factories"] == 2);
  CHECK(j["horizon"] == 30);
  CHECK(dataset_from_json(j).products.size() == 8);
}

TEST_CASE("without a dataset, dataset routes answer 503") {
  Harness h(std::nullopt);
  expect_schema(h.get("/api/dataset", 503), "error.json");
  h.post(Json::object(), 503);
  const auto list = h.get("/api/plans", 200);
  expect_schema(list, "plan_list.json");
  CHECK(list["plans"].empty());
}

TEST_CASE("scaling capacity by half raises every scaled day by 1.5x") {
  Harness h(testing_support::scenario_dataset());
  const auto base = h.post({{"label", "base"}}, 201);
  const auto edited = h.post({{"base_plan_id", base["id"]},
                              {"label", "more capacity"},
                              {"config_edits",
                               {{{"kind", "scale_capacity"}, {"capacity_set", "F1-assembly"}, {"percent", 50}, {"days", {0, 29}}},
                                {{"kind", "scale_capacity"}, {"capacity_set", "F2-line"}, {"percent", 50}, {"days", {0, 29}}}}}},
                             201);
  CHECK(edited["parent_id"] == base["id"]);
  const auto a = h.plan(base["id"]);
  const auto b = h.plan(edited["id"]);
  for (const char* set : {"F1-assembly", "F2-line"}) {
    const auto ca = capacity_of(a, set);
    const auto cb = capacity_of(b, set);
    for (std::size_t t = 0; t < ca.size(); ++t) CHECK(cb[t].get<double>() == doctest::Approx(1.5 * ca[t].get<double>()));
  }
  CHECK(capacity_of(a, "F1-smt") == capacity_of(b, "F1-smt"));
  CHECK(b["kpis"]["totals"]["delay_rate"].get<double>() <= a["kpis"]["totals"]["delay_rate"].get<double>() + 1e-9);

  const auto d = h.diff(base["id"], edited["id"]);
  CHECK(d["config"]["capacity"]["delta"].get<double>() == doctest::Approx(0.5 * (60.0 + 100.0) * 30));
  CHECK(d["config"]["demand"]["unchanged"] == true);
}

TEST_CASE("more common stock never worsens delay of the allowed routers") {
  Harness h(testing_support::three_parent_dataset());
  const auto base = h.post({{"label", "base"}}, 201);
  const auto more = h.post({{"base_plan_id", base["id"]},
                            {"config_edits", {{{"kind", "set_initial_inventory"}, {"product", "common_32"}, {"value", 8000}}}}},
                           201);
  const auto a = h.plan(base["id"]);
  const auto b = h.plan(more["id"]);
  for (const char* p : {"Routers_22", "Service_Router_18"}) CHECK(delay_total(b, p) <= delay_total(a, p) + 1e-9);
  CHECK(delay_total(b, "Routers_491") == doctest::Approx(delay_total(a, "Routers_491")));
  CHECK(b["inventory"]["common_32"][0].get<std::int64_t>() >= 0);

  const auto freed = h.post({{"base_plan_id", more["id"]},
                             {"config_edits", {{{"kind", "remove_fixed_constraint"}, {"component", "common_32"}}}}},
                            201);
  CHECK(delay_total(h.plan(freed["id"]), "Routers_491") == doctest::Approx(0.0));
}

TEST_CASE("toggling a holiday twice restores the base config") {
  Harness h(testing_support::scenario_dataset());
  const auto base = h.post(Json::object(), 201);
  const Json toggle = {{"kind", "toggle_holiday"}, {"factory", "F1"}, {"day", 3}};
  const auto once = h.post({{"base_plan_id", base["id"]}, {"config_edits", {toggle}}}, 201);
  CHECK(once["config"]["holidays"] == 1);
  const auto twice = h.post({{"base_plan_id", once["id"]}, {"config_edits", {toggle}}}, 201);
  CHECK(h.plan(twice["id"])["config"] == h.plan(base["id"])["config"]);
  const auto d = h.diff(base["id"], twice["id"]);
  for (const char* c : {"demand", "inventory", "capacity", "holidays"}) CHECK(d["config"][c]["unchanged"] == true);
}

TEST_CASE("plans chain through parent links and can be deleted") {
  Harness h(testing_support::scenario_dataset());
  const auto p1 = h.post({{"label", "one"}}, 201);
  const auto p2 = h.post({{"base_plan_id", p1["id"]}, {"label", "two"}}, 201);
  const auto p3 = h.post({{"base_plan_id", p2["id"]}, {"label", "three"}}, 201);
  CHECK(p1["parent_id"].is_null());
  CHECK(p3["parent_id"] == p2["id"]);

  auto list = h.get("/api/plans", 200);
  expect_schema(list, "plan_list.json");
  REQUIRE(list["plans"].size() == 3);
  CHECK(list["plans"][2]["label"] == "three");

  auto res = h.client->Delete("/api/plans/" + p2["id"].get<std::string>());
  REQUIRE(res);
  CHECK(res->status == 204);
  expect_schema(h.get("/api/plans/" + p2["id"].get<std::string>(), 404), "error.json");
  res = h.client->Delete("/api/plans/" + p2["id"].get<std::string>());
  REQUIRE(res);
  CHECK(res->status == 404);

  list = h.get("/api/plans", 200);
  expect_schema(list, "plan_list.json");
  REQUIRE(list["plans"].size() == 2);
  CHECK(list["plans"][1]["parent_deleted"] == true);
  h.post({{"base_plan_id", p2["id"]}}, 404);
}

TEST_CASE("identical requests produce identical production") {
  Harness h(testing_support::scenario_dataset());
  const Json body = {{"config_edits", {{{"kind", "set_demand_point"}, {"product", "Laptop"}, {"day", 5}, {"value", 90}}}}};
  const auto a = h.plan(h.post(body, 201)["id"]);
  const auto b = h.plan(h.post(body, 201)["id"]);
  CHECK(a["production"].dump() == b["production"].dump());
  CHECK(a["config"]["demand"]["Laptop"][5] == 90);
}

TEST_CASE("diff levels") {
  Harness h(testing_support::scenario_dataset());
  const auto a = h.post(Json::object(), 201)["id"].get<std::string>();
  const auto b = h.post({{"config_edits",
                          {{{"kind", "toggle_holiday"}, {"factory", "F1"}, {"day", 10}},
                           {{"kind", "toggle_holiday"}, {"factory", "F1"}, {"day", 11}}}}},
                        201)["id"]
                     .get<std::string>();

  const auto self = h.diff(a, a);
  for (const char* k : {"delay_rate", "production_cost", "inventory_cost", "smoothing_rate"}) {
    CHECK(self["kpis"][k]["delta"].get<double>() == 0.0);
  }
  CHECK_FALSE(self.contains("products"));

  const auto products = h.diff(a, b, "?level=product");
  CHECK(products["level"] == "product");
  CHECK(products["config"]["holidays"]["delta"] == 2);
  bool sentinel_seen = false;
  for (const auto& p : products["products"]) {
    const auto& d = p["delta"]["smoothing_rate"];
    if (d["was_sentinel_in_a"] == true || d["is_sentinel_in_b"] == true) {
      sentinel_seen = true;
      CHECK_FALSE(d.contains("delta"));
    }
  }
  CHECK(sentinel_seen);

  const auto detail = h.diff(a, b, "?level=detail&product=Laptop");
  CHECK(detail["product"]["product"] == "Laptop");
  // Laptop, Board, Screen and their raw materials Chip, Pcb, Glass.
  CHECK(detail["slice"]["tree"].size() == 6);
  CHECK(detail["slice"]["tree"][0]["product"] == "Laptop");
  CHECK(detail["detail"]["nodes"].size() == 6);

  expect_schema(h.get("/api/diff/" + a + "/" + b + "?level=detail", 400), "error.json");
  expect_schema(h.get("/api/diff/" + a + "/" + b + "?level=bogus", 400), "error.json");
  expect_schema(h.get("/api/diff/" + a + "/" + b + "?level=detail&product=Nope", 404), "error.json");
  expect_schema(h.get("/api/diff/" + a + "/missing", 404), "error.json");
}

TEST_CASE("bad requests answer 400") {
  Harness h(testing_support::scenario_dataset());
  auto res = h.client->Post("/api/plans", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  expect_schema(Json::parse(res->body), "error.json");
  h.post({{"config_edits", {{{"kind", "toggle_holiday"}, {"factory", "F9"}, {"day", 1}}}}}, 400);
  h.post({{"config_edits", {{{"kind", "set_demand_point"}, {"product", "Laptop"}, {"day", 99}, {"value", 1}}}}}, 400);
  h.post({{"config_edits", {{{"kind", "explode"}}}}}, 400);
  h.post({{"label", 7}}, 400);
}

TEST_CASE("CORS headers and preflight") {
  ServiceOptions options;
  options.cors_origin = "http://localhost:5173";
  Harness h(testing_support::scenario_dataset(), options);
  auto res = h.client->Get("/api/plans");
  REQUIRE(res);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  res = h.client->Options("/api/plans");
  REQUIRE(res);
  CHECK(res->status == 204);
  CHECK(res->get_header_value("Access-Control-Allow-Methods").find("DELETE") != std::string::npos);
}

TEST_CASE("a run that cannot finish in time answers 504") {
  ServiceOptions options;
  options.run_timeout = std::chrono::milliseconds(0);
  Harness h(testing_support::scenario_dataset(), options);
  h.post(Json::object(), 504);
}

TEST_CASE("planning errors map to HTTP statuses") {
  CHECK(status_for(PlanningError::Kind::kInvalidConfig) == 400);
  CHECK(status_for(PlanningError::Kind::kInfeasible) == 422);
  CHECK(status_for(PlanningError::Kind::kTimeout) == 504);
  CHECK(status_for(PlanningError::Kind::kUnbounded) == 500);
}

TEST_CASE("every published schema is valid JSON with an id") {
  for (const auto& entry : fs::directory_iterator(WHATIF_SCHEMA_DIR)) {
    const auto doc = read_json_file(entry.path());
    CHECK(doc["$id"] == entry.path().filename().string());
  }
}
