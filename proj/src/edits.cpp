#include "whatif/edits.hpp"

#include <cmath>

namespace whatif {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_day(const PlanConfig& cfg, int day) {
  if (day < 0 || day >= cfg.horizon) {
    throw EditError("day " + std::to_string(day) + " is outside the horizon of " +
                    std::to_string(cfg.horizon) + " days");
  }
}

void check_count(std::int64_t value, const char* what) {
  if (value < 0) throw EditError(std::string(what) + " must be non-negative");
}

CapacitySet& find_set(PlanConfig& cfg, const std::string& id) {
  for (auto& cs : cfg.capacity_sets) {
    if (cs.id == id) return cs;
  }
  throw EditError("unknown capacity set: " + id);
}

template <typename T>
T get(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw EditError(std::string("edit is missing \"") + key + "\"");
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception&) {
    throw EditError(std::string("edit field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

PlanConfig apply_edits(const Dataset& dataset, const PlanConfig& base,
                       const std::vector<ConfigEdit>& edits) {
  DatasetIndex index(dataset);
  PlanConfig cfg = base;
  auto product = [&](const std::string& id) {
    const auto p = index.find_product(id);
    if (!p) throw EditError("unknown product: " + id);
    return *p;
  };
  for (const auto& edit : edits) {
    std::visit(
        overloaded{
            [&](const SetDemandPoint& e) {
              product(e.product);
              check_day(cfg, e.day);
              check_count(e.value, "demand");
              auto& series = cfg.demand[e.product];
              series.resize(static_cast<std::size_t>(cfg.horizon), 0);
              series[static_cast<std::size_t>(e.day)] = e.value;
            },
            [&](const SetInitialInventory& e) {
              product(e.product);
              check_count(e.value, "inventory");
              cfg.initial_inventory[e.product] = e.value;
            },
            [&](const SetCapacityPoint& e) {
              auto& cs = find_set(cfg, e.capacity_set);
              check_day(cfg, e.day);
              if (e.value && (!std::isfinite(*e.value) || *e.value < 0)) {
                throw EditError("capacity must be a non-negative number or null");
              }
              cs.daily_capacity[static_cast<std::size_t>(e.day)] = e.value;
            },
            [&](const ScaleCapacity& e) {
              auto& cs = find_set(cfg, e.capacity_set);
              check_day(cfg, e.first_day);
              check_day(cfg, e.last_day);
              if (e.first_day > e.last_day) throw EditError("day range is empty");
              if (!std::isfinite(e.percent) || e.percent < -100.0) {
                throw EditError("percent must be a number of at least -100");
              }
              const double factor = 1.0 + e.percent / 100.0;
              for (int t = e.first_day; t <= e.last_day; ++t) {
                auto& v = cs.daily_capacity[static_cast<std::size_t>(t)];
                if (v) *v *= factor;
              }
            },
            [&](const ToggleHoliday& e) {
              if (!index.find_factory(e.factory)) throw EditError("unknown factory: " + e.factory);
              check_day(cfg, e.day);
              auto& days = cfg.holidays[e.factory];
              if (!days.erase(e.day)) days.insert(e.day);
              if (days.empty()) cfg.holidays.erase(e.factory);
            },
            [&](const RemoveFixedConstraint& e) {
              bool known = false;
              for (const auto& c : dataset.fixed_component_constraints) known = known || c.component == e.component;
              if (!known) throw EditError("no fixed-component constraint on " + e.component);
              cfg.disabled_fixed_components.insert(e.component);
            },
        },
        edit);
  }
  return cfg;
}

ConfigEdit edit_from_json(const Json& doc) {
  if (!doc.is_object()) throw EditError("an edit must be a JSON object");
  const auto kind = get<std::string>(doc, "kind");
  if (kind == "set_demand_point") {
    return SetDemandPoint{get<std::string>(doc, "product"), get<int>(doc, "day"),
                          get<std::int64_t>(doc, "value")};
  }
  if (kind == "set_initial_inventory") {
    return SetInitialInventory{get<std::string>(doc, "product"), get<std::int64_t>(doc, "value")};
  }
  if (kind == "set_capacity_point") {
    if (!doc.contains("value")) throw EditError("edit is missing \"value\"");
    std::optional<double> v;
    if (!doc.at("value").is_null()) v = get<double>(doc, "value");
    return SetCapacityPoint{get<std::string>(doc, "capacity_set"), get<int>(doc, "day"), v};
  }
  if (kind == "scale_capacity") {
    const auto days = get<std::vector<int>>(doc, "days");
    if (days.size() != 2) throw EditError("\"days\" must be [first, last]");
    return ScaleCapacity{get<std::string>(doc, "capacity_set"), get<double>(doc, "percent"), days[0],
                         days[1]};
  }
  if (kind == "toggle_holiday") {
    return ToggleHoliday{get<std::string>(doc, "factory"), get<int>(doc, "day")};
  }
  if (kind == "remove_fixed_constraint") {
    return RemoveFixedConstraint{get<std::string>(doc, "component")};
  }
  throw EditError("unknown edit kind: " + kind);
}

std::vector<ConfigEdit> edits_from_json(const Json& doc) {
  if (!doc.is_array()) throw EditError("config_edits must be an array");
  std::vector<ConfigEdit> out;
  for (const auto& e : doc) out.push_back(edit_from_json(e));
  return out;
}

Json to_json(const ConfigEdit& edit) {
  return std::visit(
      overloaded{
          [](const SetDemandPoint& e) {
            return Json{{"kind", "set_demand_point"}, {"product", e.product}, {"day", e.day}, {"value", e.value}};
          },
          [](const SetInitialInventory& e) {
            return Json{{"kind", "set_initial_inventory"}, {"product", e.product}, {"value", e.value}};
          },
          [](const SetCapacityPoint& e) {
            return Json{{"kind", "set_capacity_point"},
                        {"capacity_set", e.capacity_set},
                        {"day", e.day},
                        {"value", e.value ? Json(*e.value) : Json(nullptr)}};
          },
          [](const ScaleCapacity& e) {
            return Json{{"kind", "scale_capacity"},
                        {"capacity_set", e.capacity_set},
                        {"percent", e.percent},
                        {"days", {e.first_day, e.last_day}}};
          },
          [](const ToggleHoliday& e) {
            return Json{{"kind", "toggle_holiday"}, {"factory", e.factory}, {"day", e.day}};
          },
          [](const RemoveFixedConstraint& e) {
            return Json{{"kind", "remove_fixed_constraint"}, {"component", e.component}};
          },
      },
      edit);
}

}  // namespace whatif
