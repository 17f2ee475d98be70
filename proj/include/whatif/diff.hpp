#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "whatif/json_io.hpp"
#include "whatif/plan.hpp"

namespace whatif {

/// Plans from different datasets or horizons cannot be compared.
class DiffError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Change of one config category from plan A to plan B. Swapping the plans
/// negates `delta` and swaps increase/decrease and the two transition counts.
struct CategoryDelta {
  double delta = 0.0;     // net signed change, B - A
  double increase = 0.0;  // sum of item increases
  double decrease = 0.0;  // sum of item decreases, as a magnitude
  // Capacity only: days that switch between unlimited and finite. These
  // never enter the numeric sums.
  std::int64_t became_unlimited = 0;
  std::int64_t became_finite = 0;
  bool unchanged = true;

  /// L1 size of the change.
  double magnitude() const { return increase + decrease; }
};

struct ConfigDelta {
  CategoryDelta demand;     // pieces, over products and days
  CategoryDelta inventory;  // initial pieces, over products
  CategoryDelta capacity;   // over sets and days with finite values on both sides
  CategoryDelta holidays;   // factory-days
};

/// Signed change of an indicator. A sentinel on either side leaves the
/// delta empty and is reported through the flags instead.
struct MetricDelta {
  std::optional<double> delta;
  bool was_sentinel_in_a = false;
  bool is_sentinel_in_b = false;
};

MetricDelta metric_delta(Metric a, Metric b);

enum class Indicator { kDelayRate, kProductionCost, kInventoryCost, kSmoothingRate };
inline constexpr std::array<Indicator, 4> kIndicators = {
    Indicator::kDelayRate, Indicator::kProductionCost, Indicator::kInventoryCost,
    Indicator::kSmoothingRate};
std::string_view to_string(Indicator indicator);

using IndicatorValues = std::array<Metric, 4>;  // indexed by Indicator
using IndicatorDeltas = std::array<MetricDelta, 4>;

IndicatorValues totals_values(const PlanTotals& totals);
/// Summary values (the `value` field of each product summary).
IndicatorValues summary_values(const ProductKpis& kpis);

struct ProductDelta {
  std::string product;
  IndicatorValues a;
  IndicatorValues b;
  IndicatorDeltas delta;
};

/// Day-level changes, B - A.
struct DetailDeltas {
  std::vector<std::string> products;
  std::vector<std::string> factories;
  std::vector<std::string> capacity_sets;
  int horizon = 0;
  std::vector<std::int64_t> production;               // (p * F + f) * H + t
  std::vector<std::vector<std::int64_t>> inventory;   // [p][t]
  std::vector<std::vector<std::int64_t>> backlog;     // [p][t]
  std::vector<std::vector<double>> capacity_use;      // [cs][t]

  std::int64_t production_at(std::size_t p, std::size_t f, int t) const {
    return production[(p * factories.size() + f) * static_cast<std::size_t>(horizon) +
                      static_cast<std::size_t>(t)];
  }
};

struct PlanDiff {
  std::string a;  // plan ids
  std::string b;
  ConfigDelta config;
  IndicatorDeltas kpis;
  std::vector<ProductDelta> products;  // product order of the plans
  DetailDeltas detail;
};

/// Throws DiffError when the plans differ in horizon, products, factories
/// or capacity sets.
PlanDiff diff_plans(const Plan& a, const Plan& b);

ConfigDelta diff_configs(const PlanConfig& a, const PlanConfig& b);

struct Range {
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return v >= min && v <= max; }
};

/// Bounds on the indicator deltas and on plan B's summary values. A
/// sentinel never satisfies a bound placed on it.
struct ProductPredicate {
  std::array<std::optional<Range>, 4> delta;
  std::array<std::optional<Range>, 4> value;
};

/// Products inside every bound, ordered by |delay delta| descending (an
/// empty delay delta sorts last), then id. Products whose indicators are
/// sentinels in both plans are never returned.
std::vector<std::string> product_filter(const PlanDiff& diff, const ProductPredicate& predicate = {});

struct TreeNode {
  std::string product;
  int depth = 0;  // 0 for the selected product
  std::int64_t cumulative_quantity = 1;
  struct Edge {
    std::string product;
    std::int64_t quantity_per = 0;
  };
  std::vector<Edge> children;  // direct components
};

struct NodeSeries {
  std::string product;
  std::vector<std::int64_t> inventory;
  std::vector<std::int64_t> backlog;
};

struct FactorySeries {
  std::string factory;
  std::vector<std::int64_t> production;
};

struct CapacitySeries {
  std::string capacity_set;
  std::vector<double> use;
  std::vector<Metric> utilization;
};

/// Everything the production detail view shows for one plan.
struct DetailSide {
  std::vector<Metric> daily_delay_rate;
  std::vector<double> daily_production_cost;
  std::vector<double> daily_inventory_cost;
  std::vector<Metric> weekly_smoothing_rate;
  std::vector<NodeSeries> nodes;  // aligned with DetailSlice::tree
  std::vector<FactorySeries> factories;
  std::vector<CapacitySeries> capacity_sets;
};

struct DetailSlice {
  std::string product;
  std::vector<std::string> parents;  // direct consumers of the product
  std::vector<TreeNode> tree;        // the product, then its transitive components
  DetailSide a;
  DetailSide b;
};

/// Throws DataError for an unknown product and DiffError on mismatched plans.
DetailSlice detail_slice(const Dataset& dataset, const Plan& a, const Plan& b,
                         std::string_view product);

enum class DiffLevel { kPlan, kProduct, kDetail };
DiffLevel diff_level_from_string(std::string_view text);  // throws std::invalid_argument

Json to_json(const MetricDelta& delta);
Json to_json(const CategoryDelta& delta);
Json to_json(const ConfigDelta& delta);
Json to_json(const ProductDelta& delta);
Json to_json(const DetailSlice& slice);
/// Plan level: config and KPI deltas. Product level adds the product
/// deltas. Detail level adds the slice for `product` and its day-level
/// deltas.
Json diff_to_json(const PlanDiff& diff, DiffLevel level, const DetailSlice* slice = nullptr);

}  // namespace whatif
