#include "whatif/json_io.hpp"

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace whatif {

using namespace detail;

namespace {

Json capacity_series_to_json(const std::vector<CapacityValue>& series) {
  Json arr = Json::array();
  for (const auto& v : series) arr.push_back(v ? Json(*v) : Json(nullptr));
  return arr;
}

std::vector<CapacityValue> capacity_series_from_json(const Json& arr) {
  if (!arr.is_array()) throw DataError("'daily_capacity' must be an array");
  std::vector<CapacityValue> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_null()) {
      out.emplace_back(std::nullopt);
    } else if (v.is_number()) {
      out.emplace_back(v.get<double>());
    } else {
      throw DataError("capacity values must be numbers or null");
    }
  }
  return out;
}

Json to_json(const CapacitySet& cs) {
  return Json{{"id", cs.id},
              {"factory", cs.factory},
              {"daily_capacity", capacity_series_to_json(cs.daily_capacity)}};
}

CapacitySet capacity_set_from_json(const Json& j) {
  return {field<std::string>(j, "id"), field<std::string>(j, "factory"),
          capacity_series_from_json(require(j, "daily_capacity"))};
}

}  // namespace

Json to_json(const PlanConfig& c) {
  Json sets = Json::array();
  for (const auto& cs : c.capacity_sets) sets.push_back(to_json(cs));
  Json holidays = Json::object();
  for (const auto& [f, days] : c.holidays) holidays[f] = std::vector<int>(days.begin(), days.end());
  return Json{
      {"horizon", c.horizon},
      {"start_date", c.start_date},
      {"demand", c.demand},
      {"initial_inventory", c.initial_inventory},
      {"capacity_sets", std::move(sets)},
      {"holidays", std::move(holidays)},
      {"objective_weights",
       {{"delay", c.objective_weights.delay},
        {"production", c.objective_weights.production},
        {"inventory", c.objective_weights.inventory},
        {"smoothing", c.objective_weights.smoothing}}},
      {"disabled_fixed_components",
       std::vector<std::string>(c.disabled_fixed_components.begin(),
                                c.disabled_fixed_components.end())},
  };
}

PlanConfig config_from_json(const Json& j) {
  PlanConfig c;
  c.horizon = field_or<int>(j, "horizon", kDefaultHorizon);
  c.start_date = field_or<std::string>(j, "start_date", "");
  c.demand = field_or<std::map<std::string, std::vector<std::int64_t>>>(j, "demand", {});
  c.initial_inventory = field_or<std::map<std::string, std::int64_t>>(j, "initial_inventory", {});
  if (j.contains("capacity_sets")) {
    for (const auto& cs : array_field(j, "capacity_sets")) {
      c.capacity_sets.push_back(capacity_set_from_json(cs));
    }
  }
  for (const auto& [f, days] :
       field_or<std::map<std::string, std::vector<int>>>(j, "holidays", {})) {
    c.holidays[f] = std::set<int>(days.begin(), days.end());
  }
  if (j.contains("objective_weights")) {
    const auto& w = j.at("objective_weights");
    c.objective_weights.delay = field_or<double>(w, "delay", 1.0);
    c.objective_weights.production = field_or<double>(w, "production", 1.0);
    c.objective_weights.inventory = field_or<double>(w, "inventory", 1.0);
    c.objective_weights.smoothing = field_or<double>(w, "smoothing", 1.0);
  }
  auto disabled = field_or<std::vector<std::string>>(j, "disabled_fixed_components", {});
  c.disabled_fixed_components = std::set<std::string>(disabled.begin(), disabled.end());
  return c;
}

Json to_json(const Dataset& d) {
  Json products = Json::array();
  for (const auto& p : d.products) {
    products.push_back({{"id", p.id},
                        {"name", p.name},
                        {"kind", std::string(to_string(p.kind))},
                        {"priority", p.priority},
                        {"unit_production_cost", p.unit_production_cost},
                        {"unit_holding_cost", p.unit_holding_cost}});
  }
  Json edges = Json::array();
  for (const auto& e : d.bom_edges) {
    edges.push_back({{"parent", e.parent}, {"child", e.child}, {"quantity_per", e.quantity_per}});
  }
  Json factories = Json::array();
  for (const auto& f : d.factories) factories.push_back({{"id", f.id}, {"name", f.name}});
  Json sets = Json::array();
  for (const auto& cs : d.capacity_sets) sets.push_back(to_json(cs));
  Json rates = Json::array();
  for (const auto& u : d.usage_rates) {
    rates.push_back({{"product", u.product}, {"capacity_set", u.capacity_set}, {"rate", u.rate}});
  }
  Json fixed = Json::array();
  for (const auto& fc : d.fixed_component_constraints) {
    fixed.push_back({{"component", fc.component},
                     {"allowed_parents", std::vector<std::string>(fc.allowed_parents.begin(),
                                                                  fc.allowed_parents.end())}});
  }
  return Json{{"products", std::move(products)},
              {"bom_edges", std::move(edges)},
              {"factories", std::move(factories)},
              {"capacity_sets", std::move(sets)},
              {"usage_rates", std::move(rates)},
              {"fixed_component_constraints", std::move(fixed)},
              {"default_config", to_json(d.default_config)}};
}

Dataset dataset_from_json(const Json& j) {
  Dataset d;
  for (const auto& p : array_field(j, "products")) {
    Product prod;
    prod.id = field<std::string>(p, "id");
    prod.name = field_or<std::string>(p, "name", prod.id);
    prod.kind = product_kind_from_string(field<std::string>(p, "kind"));
    prod.priority = field<int>(p, "priority");
    prod.unit_production_cost =
        field_or<std::map<std::string, double>>(p, "unit_production_cost", {});
    prod.unit_holding_cost = field_or<double>(p, "unit_holding_cost", 0.0);
    d.products.push_back(std::move(prod));
  }
  for (const auto& e : array_field(j, "bom_edges")) {
    const Json& q = require(e, "quantity_per");
    if (!q.is_number_integer()) throw DataError("'quantity_per' must be a whole number");
    d.bom_edges.push_back(
        {field<std::string>(e, "parent"), field<std::string>(e, "child"), q.get<std::int64_t>()});
  }
  for (const auto& f : array_field(j, "factories")) {
    auto id = field<std::string>(f, "id");
    d.factories.push_back({id, field_or<std::string>(f, "name", id)});
  }
  for (const auto& cs : array_field(j, "capacity_sets")) {
    d.capacity_sets.push_back(capacity_set_from_json(cs));
  }
  for (const auto& u : array_field(j, "usage_rates")) {
    d.usage_rates.push_back({field<std::string>(u, "product"),
                             field<std::string>(u, "capacity_set"), field<double>(u, "rate")});
  }
  for (const auto& fc : array_field(j, "fixed_component_constraints")) {
    auto parents = field<std::vector<std::string>>(fc, "allowed_parents");
    d.fixed_component_constraints.push_back(
        {field<std::string>(fc, "component"), std::set<std::string>(parents.begin(), parents.end())});
  }
  d.default_config = config_from_json(require(j, "default_config"));
  if (!j.at("default_config").contains("capacity_sets")) {
    d.default_config.capacity_sets = d.capacity_sets;
  }
  return d;
}

std::string canonical_dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_json_file(path));
}

}  // namespace whatif
