#include "whatif/plan.hpp"

#include <cmath>
#include <ctime>
#include <random>

#include "json_util.hpp"

namespace whatif {

using namespace detail;

ConfigMagnitudes config_magnitudes(const PlanConfig& config) {
  ConfigMagnitudes m;
  for (const auto& [id, series] : config.demand) {
    for (auto v : series) m.demand += static_cast<double>(v);
  }
  for (const auto& [id, v] : config.initial_inventory) m.inventory += static_cast<double>(v);
  for (const auto& cs : config.capacity_sets) {
    for (const auto& v : cs.daily_capacity) {
      if (v) {
        m.capacity += *v;
      } else {
        ++m.infinite_capacity_days;
      }
    }
  }
  for (const auto& [factory, days] : config.holidays) {
    m.holidays += static_cast<std::int64_t>(days.size());
  }
  return m;
}

PlanSummary summarize(const Plan& plan) {
  return {plan.id,
          plan.parent_id,
          plan.label,
          plan.created_at,
          config_magnitudes(plan.config),
          plan.kpis.totals,
          plan.solver.objective};
}

std::string new_plan_id() {
  thread_local std::mt19937_64 rng([] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }());
  std::uint64_t hi = rng(), lo = rng();
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // RFC 4122 variant
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Plan plan(const Dataset& dataset, const PlanConfig& config, const HybridParams& params,
          const PlanOptions& options) {
  const auto problem = build_problem(dataset, config);
  auto result = solve_hybrid(problem, params);
  auto trajectories = simulate(dataset, config, result.production);

  Plan out;
  out.id = new_plan_id();
  out.parent_id = options.parent_id;
  out.label = options.label;
  out.created_at = utc_timestamp();
  out.config = config;
  out.kpis = compute_kpis(dataset, config, result.production, trajectories.inventory,
                          trajectories.backlog);
  out.production = std::move(result.production);
  out.inventory = std::move(trajectories.inventory);
  out.backlog = std::move(trajectories.backlog);
  out.solver = {result.objective, result.lp_objective, result.lp_exact, result.lp_iterations};
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json metrics(const std::vector<Metric>& series) {
  Json arr = Json::array();
  for (auto m : series) arr.push_back(m.raw());
  return arr;
}

std::vector<Metric> metrics_from(const Json& arr) {
  std::vector<Metric> out;
  for (double v : get_as<std::vector<double>>(arr, "metric series")) out.emplace_back(v);
  return out;
}

Json summary_json(const IndicatorSummary& s) {
  return Json{{"value", s.value.raw()}, {"mean", s.mean.raw()}, {"variance", s.variance.raw()}};
}

IndicatorSummary summary_from(const Json& j) {
  return {field<double>(j, "value"), field<double>(j, "mean"), field<double>(j, "variance")};
}

Json totals_json(const PlanTotals& t) {
  return Json{{"delay_rate", t.delay_rate.raw()},
              {"production_cost", t.production_cost.raw()},
              {"inventory_cost", t.inventory_cost.raw()},
              {"smoothing_rate", t.smoothing_rate.raw()}};
}

PlanTotals totals_from(const Json& j) {
  return {field<double>(j, "delay_rate"), field<double>(j, "production_cost"),
          field<double>(j, "inventory_cost"), field<double>(j, "smoothing_rate")};
}

Json series_map(const std::vector<std::string>& ids,
                const std::vector<std::vector<std::int64_t>>& series) {
  Json obj = Json::object();
  for (std::size_t p = 0; p < ids.size() && p < series.size(); ++p) obj[ids[p]] = series[p];
  return obj;
}

std::vector<std::vector<std::int64_t>> series_from(const Json& obj,
                                                   const std::vector<std::string>& ids,
                                                   const char* what) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& id : ids) out.push_back(field<std::vector<std::int64_t>>(obj, id.c_str()));
  if (!obj.is_object() || obj.size() != ids.size()) {
    throw DataError(std::string("'") + what + "' does not match the production products");
  }
  return out;
}

Json optional_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

std::optional<std::string> optional_string_from(const Json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (v.is_null()) return std::nullopt;
  return get_as<std::string>(v, key);
}

}  // namespace

Json to_json(const Metric& metric) { return metric.raw(); }

Json to_json(const KpiSet& kpis) {
  Json products = Json::array();
  for (const auto& p : kpis.products) {
    products.push_back(Json{
        {"product", p.product},
        {"daily_delay_rate", metrics(p.daily_delay_rate)},
        {"daily_production_cost", p.daily_production_cost},
        {"daily_inventory_cost", p.daily_inventory_cost},
        {"weekly_smoothing_rate", metrics(p.weekly_smoothing_rate)},
        {"summary",
         {{"delay_rate", summary_json(p.delay_rate)},
          {"production_cost", summary_json(p.production_cost)},
          {"inventory_cost", summary_json(p.inventory_cost)},
          {"smoothing_rate", summary_json(p.smoothing_rate)}}},
        {"total_demand", p.total_demand},
        {"total_delayed", p.total_delayed},
    });
  }
  Json sets = Json::array();
  for (const auto& cs : kpis.capacity_sets) {
    sets.push_back(Json{{"capacity_set", cs.capacity_set},
                        {"daily_use", cs.daily_use},
                        {"daily_utilization", metrics(cs.daily_utilization)},
                        {"weekly_use", cs.weekly_use},
                        {"weekly_smoothing_rate", metrics(cs.weekly_smoothing_rate)}});
  }
  return Json{{"products", products}, {"capacity_sets", sets}, {"totals", totals_json(kpis.totals)}};
}

KpiSet kpis_from_json(const Json& doc) {
  KpiSet k;
  for (const auto& j : array_field(doc, "products")) {
    ProductKpis p;
    p.product = field<std::string>(j, "product");
    p.daily_delay_rate = metrics_from(require(j, "daily_delay_rate"));
    p.daily_production_cost = field<std::vector<double>>(j, "daily_production_cost");
    p.daily_inventory_cost = field<std::vector<double>>(j, "daily_inventory_cost");
    p.weekly_smoothing_rate = metrics_from(require(j, "weekly_smoothing_rate"));
    const auto& s = require(j, "summary");
    p.delay_rate = summary_from(require(s, "delay_rate"));
    p.production_cost = summary_from(require(s, "production_cost"));
    p.inventory_cost = summary_from(require(s, "inventory_cost"));
    p.smoothing_rate = summary_from(require(s, "smoothing_rate"));
    p.total_demand = field<std::int64_t>(j, "total_demand");
    p.total_delayed = field<std::int64_t>(j, "total_delayed");
    k.products.push_back(std::move(p));
  }
  for (const auto& j : array_field(doc, "capacity_sets")) {
    CapacitySetKpis cs;
    cs.capacity_set = field<std::string>(j, "capacity_set");
    cs.daily_use = field<std::vector<double>>(j, "daily_use");
    cs.daily_utilization = metrics_from(require(j, "daily_utilization"));
    cs.weekly_use = field<std::vector<double>>(j, "weekly_use");
    cs.weekly_smoothing_rate = metrics_from(require(j, "weekly_smoothing_rate"));
    k.capacity_sets.push_back(std::move(cs));
  }
  k.totals = totals_from(require(doc, "totals"));
  return k;
}

Json to_json(const Production& production) {
  Json lanes = Json::array();
  for (std::size_t p = 0; p < production.num_products(); ++p) {
    for (std::size_t f = 0; f < production.num_factories(); ++f) {
      std::vector<std::int64_t> q(static_cast<std::size_t>(production.horizon()));
      bool any = false;
      for (int t = 0; t < production.horizon(); ++t) {
        q[static_cast<std::size_t>(t)] = production.at(p, f, t);
        any = any || q[static_cast<std::size_t>(t)] != 0;
      }
      if (!any) continue;
      lanes.push_back(Json{{"product", production.product_ids()[p]},
                           {"factory", production.factory_ids()[f]},
                           {"quantities", q}});
    }
  }
  return Json{{"horizon", production.horizon()},
              {"products", production.product_ids()},
              {"factories", production.factory_ids()},
              {"lanes", lanes}};
}

Production production_from_json(const Json& doc) {
  const auto products = field<std::vector<std::string>>(doc, "products");
  const auto factories = field<std::vector<std::string>>(doc, "factories");
  const int horizon = field<int>(doc, "horizon");
  if (horizon < 0) throw DataError("negative production horizon");
  Production out(products, factories, horizon);
  auto position = [](const std::vector<std::string>& ids, const std::string& id) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == id) return i;
    }
    throw DataError("production lane refers to unknown id '" + id + "'");
  };
  for (const auto& lane : array_field(doc, "lanes")) {
    const auto p = position(products, field<std::string>(lane, "product"));
    const auto f = position(factories, field<std::string>(lane, "factory"));
    const auto q = field<std::vector<std::int64_t>>(lane, "quantities");
    if (static_cast<int>(q.size()) != horizon) throw DataError("production lane length mismatch");
    for (int t = 0; t < horizon; ++t) {
      if (q[static_cast<std::size_t>(t)] < 0) throw DataError("negative production quantity");
      out.at(p, f, t) = q[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

Json to_json(const Plan& plan) {
  return Json{{"id", plan.id},
              {"parent_id", optional_string(plan.parent_id)},
              {"label", plan.label},
              {"created_at", plan.created_at},
              {"config", to_json(plan.config)},
              {"production", to_json(plan.production)},
              {"inventory", series_map(plan.production.product_ids(), plan.inventory)},
              {"backlog", series_map(plan.production.product_ids(), plan.backlog)},
              {"kpis", to_json(plan.kpis)},
              {"solver",
               {{"objective", plan.solver.objective},
                {"lp_objective", plan.solver.lp_objective},
                {"lp_exact", plan.solver.lp_exact},
                {"lp_iterations", plan.solver.lp_iterations}}}};
}

Plan plan_from_json(const Json& doc) {
  Plan p;
  p.id = field<std::string>(doc, "id");
  p.parent_id = optional_string_from(doc, "parent_id");
  p.label = field<std::string>(doc, "label");
  p.created_at = field<std::string>(doc, "created_at");
  p.config = config_from_json(require(doc, "config"));
  p.production = production_from_json(require(doc, "production"));
  p.inventory = series_from(require(doc, "inventory"), p.production.product_ids(), "inventory");
  p.backlog = series_from(require(doc, "backlog"), p.production.product_ids(), "backlog");
  p.kpis = kpis_from_json(require(doc, "kpis"));
  const auto& s = require(doc, "solver");
  p.solver = {field<double>(s, "objective"), field<double>(s, "lp_objective"),
              field<bool>(s, "lp_exact"), field<std::int64_t>(s, "lp_iterations")};
  return p;
}

Json to_json(const PlanSummary& s) {
  return Json{{"id", s.id},
              {"parent_id", optional_string(s.parent_id)},
              {"label", s.label},
              {"created_at", s.created_at},
              {"config",
               {{"demand", s.config.demand},
                {"inventory", s.config.inventory},
                {"capacity", s.config.capacity},
                {"infinite_capacity_days", s.config.infinite_capacity_days},
                {"holidays", s.config.holidays}}},
              {"totals", totals_json(s.totals)},
              {"objective", s.objective}};
}

PlanSummary summary_from_json(const Json& doc) {
  PlanSummary s;
  s.id = field<std::string>(doc, "id");
  s.parent_id = optional_string_from(doc, "parent_id");
  s.label = field<std::string>(doc, "label");
  s.created_at = field<std::string>(doc, "created_at");
  const auto& c = require(doc, "config");
  s.config = {field<double>(c, "demand"), field<double>(c, "inventory"), field<double>(c, "capacity"),
              field<std::int64_t>(c, "infinite_capacity_days"), field<std::int64_t>(c, "holidays")};
  s.totals = totals_from(require(doc, "totals"));
  s.objective = field<double>(doc, "objective");
  return s;
}

}  // namespace whatif
