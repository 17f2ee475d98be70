#pragma once

#include <optional>
#include <string>
#include <vector>

#include "whatif/indicators.hpp"
#include "whatif/json_io.hpp"
#include "whatif/model.hpp"
#include "whatif/planner.hpp"
#include "whatif/production.hpp"

namespace whatif {

struct SolverInfo {
  double objective = 0.0;
  double lp_objective = 0.0;
  bool lp_exact = true;
  std::int64_t lp_iterations = 0;

  bool operator==(const SolverInfo&) const = default;
};

/// One immutable planning result.
struct Plan {
  std::string id;
  std::optional<std::string> parent_id;
  std::string label;
  std::string created_at;  // UTC, ISO 8601
  PlanConfig config;
  Production production;
  std::vector<std::vector<std::int64_t>> inventory;  // dataset product order
  std::vector<std::vector<std::int64_t>> backlog;
  KpiSet kpis;
  SolverInfo solver;
};

/// Sizes of the four editable config categories, as drawn on a plan glyph.
struct ConfigMagnitudes {
  double demand = 0.0;     // total pieces
  double inventory = 0.0;  // total initial pieces
  double capacity = 0.0;   // sum of finite daily capacity
  std::int64_t infinite_capacity_days = 0;
  std::int64_t holidays = 0;  // factory-days

  bool operator==(const ConfigMagnitudes&) const = default;
};

ConfigMagnitudes config_magnitudes(const PlanConfig& config);

struct PlanSummary {
  std::string id;
  std::optional<std::string> parent_id;
  std::string label;
  std::string created_at;
  ConfigMagnitudes config;
  PlanTotals totals;
  double objective = 0.0;
};

PlanSummary summarize(const Plan& plan);

struct PlanOptions {
  std::optional<std::string> parent_id;
  std::string label;
};

/// build_problem, solve_hybrid, simulate and compute_kpis under a fresh id.
Plan plan(const Dataset& dataset, const PlanConfig& config, const HybridParams& params = {},
          const PlanOptions& options = {});

/// Random (version 4) UUID string.
std::string new_plan_id();
/// Current UTC time, second resolution, e.g. 2024-01-01T08:30:00Z.
std::string utc_timestamp();

Json to_json(const Metric& metric);
Json to_json(const KpiSet& kpis);
KpiSet kpis_from_json(const Json& doc);
Json to_json(const Production& production);
Production production_from_json(const Json& doc);
Json to_json(const Plan& plan);
Plan plan_from_json(const Json& doc);
Json to_json(const PlanSummary& summary);
PlanSummary summary_from_json(const Json& doc);

}  // namespace whatif
