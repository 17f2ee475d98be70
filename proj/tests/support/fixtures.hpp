#pragma once

// The bundled scenario datasets. tests/fixtures/*.json are their serialised
// form (test_fixtures checks that the two agree).

#include "support/builders.hpp"

namespace testing_support {

/// Eight products over two factories. F1-assembly is the bottleneck (Laptop
/// and Tablet need 65 a day against 60). F2-screens is a newly added set
/// with no capacity in the first week.
inline whatif::Dataset scenario_dataset() {
  using whatif::ProductKind;
  const int h = 30;
  whatif::Dataset ds;
  ds.factories = {{"F1", "Main plant"}, {"F2", "Second plant"}};
  ds.products = {
      product("Laptop", ProductKind::kFinished, 1, {{"F1", 10.0}}, 0.2),
      product("Tablet", ProductKind::kFinished, 2, {{"F1", 8.0}}, 0.15),
      product("Server", ProductKind::kFinished, 3, {{"F2", 20.0}}, 0.4),
      product("Board", ProductKind::kIntermediate, 4, {{"F1", 3.0}, {"F2", 4.0}}, 0.05),
      product("Screen", ProductKind::kIntermediate, 5, {{"F2", 2.0}}, 0.05),
      product("Chip", ProductKind::kRawMaterial, 6, {}, 0.01),
      product("Pcb", ProductKind::kRawMaterial, 7, {}, 0.01),
      product("Glass", ProductKind::kRawMaterial, 8, {}, 0.01),
  };
  ds.bom_edges = {{"Laptop", "Board", 1}, {"Laptop", "Screen", 1}, {"Tablet", "Board", 1},
                  {"Tablet", "Screen", 1}, {"Server", "Board", 2},  {"Server", "Chip", 2},
                  {"Board", "Chip", 1},    {"Board", "Pcb", 1},     {"Screen", "Glass", 1}};
  ds.capacity_sets = {capacity("F1-assembly", "F1", h, 60.0), capacity("F1-smt", "F1", h, 120.0),
                      capacity("F2-line", "F2", h, 100.0), capacity("F2-screens", "F2", h, 80.0)};
  for (int t = 0; t < 7; ++t) ds.capacity_sets[3].daily_capacity[static_cast<std::size_t>(t)] = 0.0;
  ds.usage_rates = {{"Laptop", "F1-assembly", 1.0}, {"Tablet", "F1-assembly", 1.0},
                    {"Board", "F1-smt", 1.0},        {"Server", "F2-line", 2.0},
                    {"Board", "F2-line", 1.0},       {"Screen", "F2-screens", 1.0}};
  finish(ds, h);
  auto& cfg = ds.default_config;
  for (int t = 0; t < h; ++t) {
    const bool weekday = t % 7 < 5;
    cfg.demand["Laptop"].push_back(weekday ? 40 : 22);
    cfg.demand["Tablet"].push_back(weekday ? 34 : 20);
    cfg.demand["Server"].push_back(weekday ? 12 : 6);
  }
  cfg.initial_inventory = {{"Screen", 500}, {"Chip", 4000}, {"Pcb", 3000}, {"Glass", 2500}};
  return ds;
}

/// Three routers share the raw component common_32, which only Routers_22
/// and Service_Router_18 may consume.
inline whatif::Dataset three_parent_dataset(std::int64_t common_stock = 1000) {
  using whatif::ProductKind;
  const int h = 30;
  whatif::Dataset ds;
  ds.factories = {{"F1", "Router plant"}};
  ds.products = {
      product("Routers_22", ProductKind::kFinished, 1, {{"F1", 5.0}}, 0.1),
      product("Service_Router_18", ProductKind::kFinished, 2, {{"F1", 6.0}}, 0.1),
      product("Routers_491", ProductKind::kFinished, 3, {{"F1", 5.5}}, 0.1),
      product("common_32", ProductKind::kRawMaterial, 4, {}, 0.01),
  };
  ds.bom_edges = {{"Routers_22", "common_32", 1},
                  {"Service_Router_18", "common_32", 1},
                  {"Routers_491", "common_32", 1}};
  ds.capacity_sets = {capacity("F1-line", "F1", h, 400.0)};
  ds.usage_rates = {{"Routers_22", "F1-line", 1.0},
                    {"Service_Router_18", "F1-line", 1.0},
                    {"Routers_491", "F1-line", 1.0}};
  ds.fixed_component_constraints = {{"common_32", {"Routers_22", "Service_Router_18"}}};
  finish(ds, h);
  auto& cfg = ds.default_config;
  cfg.demand["Routers_22"] = std::vector<std::int64_t>(h, 100);
  cfg.demand["Service_Router_18"] = std::vector<std::int64_t>(h, 80);
  cfg.demand["Routers_491"] = std::vector<std::int64_t>(h, 50);
  cfg.initial_inventory = {{"common_32", common_stock}};
  return ds;
}

}  // namespace testing_support
